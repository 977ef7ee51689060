from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.orm import Session
from typing import List

import numpy as np

from app.api.schemas import (
    AutRequest,
    GeodesicRow,
    GeodesicSampleRequest,
    GeodesicSampleResponse,
    HealthResponse,
    LeftInverseRequest,
    LeftInverseResponse,
    LiftRequest,
    LiftResponse,
    MembershipRequest,
    MembershipResponse,
    PointRequest,
    PointResponse,
    RhoResponse,
    RunConfig,
    RunRecord,
    SandwichRequest,
    SandwichResponse,
    VerificationSummary,
    left_inverse_to_model,
    spec_from_model,
)
from app.config import default_seed
from app.database.database import get_db
from app.database.models import VerificationRun
from app.exceptions import TetraError
from app.services.domains import check_membership, rho, tetrablock_margin
from app.services.geodesic_factory import evaluate_geodesic, geodesic_disc
from app.services.left_inverse import LeftInverse, build_left_inverse, verify_left_inverse
from app.services.lifting import lift_avoiding_T, lift_through_T_origin
from app.services.scalar_kernel import halton_disc_samples
from app.services.transforms import TetraAutParams, aut_tetrablock, aut_tetrablock_inverse
from app.services.verification_pipeline import VerificationPipeline
from app.services.verification_service import pair_sandwich
from app.utils.formatting import from_pair, to_jsonable, to_pair

router = APIRouter()


def _point(pairs) -> np.ndarray:
    return np.array([from_pair(p) for p in pairs], dtype=complex)


def _pairs(values) -> list:
    return [tuple(to_pair(v)) for v in np.ravel(values)]


def _unprocessable(e: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=f"{type(e).__name__}: {e}")


@router.get("/health", response_model=HealthResponse)
async def health_check():
    """Health check endpoint"""
    return HealthResponse(status="healthy", message="Tetrablock verifier is running")


@router.post("/member", response_model=MembershipResponse)
async def member(request: MembershipRequest):
    """Membership verdict and margin for a point"""
    try:
        report = check_membership(request.domain, _point(request.point))
        return MembershipResponse(
            domain=request.domain, inside=report.inside, margin=report.margin, boundary=report.boundary
        )
    except (TetraError, ValueError) as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/rho", response_model=RhoResponse)
async def gauge(request: PointRequest):
    try:
        return RhoResponse(rho=float(rho(_point(request.point))))
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/aut", response_model=PointResponse)
async def automorphism(request: AutRequest):
    """Apply a tetrablock automorphism or its inverse"""
    try:
        params = TetraAutParams(from_pair(request.a1), from_pair(request.a2), request.theta, request.eta, request.swap)
        transform = aut_tetrablock_inverse if request.inverse else aut_tetrablock
        return PointResponse(point=_pairs(transform(params, _point(request.point))))
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/geodesic/sample", response_model=GeodesicSampleResponse)
async def sample_geodesic(request: GeodesicSampleRequest):
    """Evaluate a geodesic at low-discrepancy points of the disc"""
    try:
        spec = spec_from_model(request.spec)
        lam = halton_disc_samples(request.samples)
        values = evaluate_geodesic(spec, lam)
        margins = np.atleast_1d(tetrablock_margin(values))
        rows = [
            GeodesicRow(lam=tuple(to_pair(l)), value=_pairs(v), margin=float(m))
            for l, v, m in zip(lam, values, margins)
        ]
        return GeodesicSampleResponse(rows=rows)
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/leftinv", response_model=LeftInverseResponse)
async def left_inverse(request: LeftInverseRequest):
    """Construct a left inverse and certify it on interior samples"""
    try:
        spec = spec_from_model(request.spec)
        li_spec = build_left_inverse(spec)
        residual = verify_left_inverse(
            lambda lam: evaluate_geodesic(spec, lam), LeftInverse(li_spec), n_samples=request.samples
        )
        return LeftInverseResponse(
            left_inverse=left_inverse_to_model(li_spec), residual=residual, samples=request.samples
        )
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/lift", response_model=LiftResponse)
async def lift(request: LiftRequest):
    """Lift a geodesic through pi and return the certificate"""
    try:
        f = geodesic_disc(spec_from_model(request.spec))
        if request.n is not None or request.m is not None:
            result = lift_through_T_origin(f, request.n, request.m, n_samples=request.samples)
        else:
            result = lift_avoiding_T(f, branch=request.branch, n_samples=request.samples)
        return LiftResponse(certificate=result.certificate())
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/sandwich", response_model=SandwichResponse)
def sandwich(request: SandwichRequest):
    """Caratheodory lower bound and lifted upper bound for a pair, without a verdict"""
    try:
        bounds = pair_sandwich(_point(request.w), _point(request.z))
        return SandwichResponse(lower=bounds.lower, upper=bounds.upper, notes=bounds.notes)
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/verify", response_model=VerificationSummary)
def verify(config: RunConfig, db: Session = Depends(get_db)):
    """Run a verification suite, optionally archiving it"""
    try:
        seed = default_seed() if config.seed is None else config.seed
        pipeline = VerificationPipeline(
            seed, config.tolerances, workers=config.workers, progress=False,
            samples=config.samples, budget=config.budget,
        )
        report = pipeline.run_suite(config.suite, config.n)
        run_id = pipeline.archive_run(report, db) if config.archive else None
        return VerificationSummary(
            run_id=run_id, suite=report["suite"], seed=report["seed"],
            summary=to_jsonable(report["summary"]), reports=to_jsonable(report["reports"]),
        )
    except TetraError as e:
        raise _unprocessable(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/runs", response_model=List[RunRecord])
async def list_runs(limit: int = 20, db: Session = Depends(get_db)):
    """Most recent archived runs"""
    runs = db.query(VerificationRun).order_by(VerificationRun.id.desc()).limit(limit).all()
    return [RunRecord.model_validate(run) for run in runs]
