from pydantic import BaseModel, Field, TypeAdapter
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np

from app.services.geodesic_factory import InsideTSpec, NonTriangularSpec, TrivialSpec, TriangularSpec
from app.services.left_inverse import CompositeSpec, DirectSpec, PsiFamilySpec
from app.services.scalar_kernel import DiscMap
from app.utils.formatting import from_pair, to_pair

# complex numbers travel as [re, im]
Complex = Tuple[float, float]
ONE: Complex = (1.0, 0.0)


def _c(pair: Complex) -> complex:
    return from_pair(pair)


def _matrix(rows: List[List[Complex]]) -> np.ndarray:
    return np.array([[_c(x) for x in row] for row in rows], dtype=complex)


def _matrix_pairs(m: np.ndarray) -> List[List[Complex]]:
    return [[tuple(to_pair(x)) for x in row] for row in np.asarray(m)]


class ScalarDiscModel(BaseModel):
    numerator: List[Complex]
    denominator: List[Complex] = [ONE]


class TrivialSpecModel(BaseModel):
    kind: Literal["trivial"] = "trivial"
    theta: float = 0.0


class InsideTSpecModel(BaseModel):
    kind: Literal["inside_t"] = "inside_t"
    f1: ScalarDiscModel
    f2: ScalarDiscModel


class TriangularSpecModel(BaseModel):
    kind: Literal["triangular"] = "triangular"
    U: List[List[Complex]]
    V: List[List[Complex]]
    c: Complex
    mu: Complex = ONE
    z_is_identity: bool = True


class NonTriangularSpecModel(BaseModel):
    kind: Literal["nontriangular"] = "nontriangular"
    a: Complex
    b: Complex
    c: Complex
    d: Complex
    mu: Complex
    beta: float


GeodesicSpecModel = Annotated[
    Union[TrivialSpecModel, InsideTSpecModel, TriangularSpecModel, NonTriangularSpecModel],
    Field(discriminator="kind"),
]
geodesic_spec_adapter = TypeAdapter(GeodesicSpecModel)


class PsiFamilyModel(BaseModel):
    kind: Literal["psi_family"] = "psi_family"
    a: Complex
    rotation: Complex = ONE
    swap: bool = False


class CompositeModel(BaseModel):
    kind: Literal["composite"] = "composite"
    tau: Complex
    gamma: Complex
    h0: Complex
    h_prime0: Complex
    weights: Tuple[int, int, int] = (1, 0, 1)


class DirectModel(BaseModel):
    kind: Literal["direct"] = "direct"
    coordinate: int
    phase: Complex


LeftInverseModel = Annotated[Union[PsiFamilyModel, CompositeModel, DirectModel], Field(discriminator="kind")]
left_inverse_adapter = TypeAdapter(LeftInverseModel)


def _disc_from_model(m: ScalarDiscModel) -> DiscMap:
    return DiscMap.scalar([_c(x) for x in m.numerator], [_c(x) for x in m.denominator])


def _disc_to_model(f: DiscMap) -> ScalarDiscModel:
    return ScalarDiscModel(
        numerator=[tuple(to_pair(x)) for x in f.numerators[0]],
        denominator=[tuple(to_pair(x)) for x in f.denominator],
    )


def spec_from_model(model) -> Any:
    """Wire model -> GeodesicSpec"""
    if isinstance(model, TrivialSpecModel):
        return TrivialSpec(theta=model.theta)
    if isinstance(model, InsideTSpecModel):
        return InsideTSpec(_disc_from_model(model.f1), _disc_from_model(model.f2))
    if isinstance(model, TriangularSpecModel):
        return TriangularSpec(_matrix(model.U), _matrix(model.V), _c(model.c), _c(model.mu), model.z_is_identity)
    if isinstance(model, NonTriangularSpecModel):
        return NonTriangularSpec(
            _c(model.a), _c(model.b), _c(model.c), _c(model.d), _c(model.mu), model.beta
        )
    raise TypeError(f"Unknown spec model {type(model).__name__}")


def spec_to_model(spec) -> Any:
    if isinstance(spec, TrivialSpec):
        return TrivialSpecModel(theta=spec.theta)
    if isinstance(spec, InsideTSpec):
        return InsideTSpecModel(f1=_disc_to_model(spec.f1), f2=_disc_to_model(spec.f2))
    if isinstance(spec, TriangularSpec):
        return TriangularSpecModel(
            U=_matrix_pairs(spec.U), V=_matrix_pairs(spec.V), c=tuple(to_pair(spec.c)),
            mu=tuple(to_pair(spec.mu)), z_is_identity=spec.z_is_identity,
        )
    if isinstance(spec, NonTriangularSpec):
        return NonTriangularSpecModel(
            a=tuple(to_pair(spec.a)), b=tuple(to_pair(spec.b)), c=tuple(to_pair(spec.c)),
            d=tuple(to_pair(spec.d)), mu=tuple(to_pair(spec.mu)), beta=spec.beta,
        )
    raise TypeError(f"Unknown spec {type(spec).__name__}")


def parse_geodesic_spec(text: str):
    return spec_from_model(geodesic_spec_adapter.validate_json(text))


def dump_geodesic_spec(spec) -> Dict[str, Any]:
    return geodesic_spec_adapter.dump_python(spec_to_model(spec), mode="json")


def left_inverse_from_model(model) -> Any:
    if isinstance(model, PsiFamilyModel):
        return PsiFamilySpec(_c(model.a), _c(model.rotation), model.swap)
    if isinstance(model, CompositeModel):
        return CompositeSpec(_c(model.tau), _c(model.gamma), _c(model.h0), _c(model.h_prime0), model.weights)
    if isinstance(model, DirectModel):
        return DirectSpec(model.coordinate, _c(model.phase))
    raise TypeError(f"Unknown left inverse model {type(model).__name__}")


def left_inverse_to_model(spec) -> Any:
    if isinstance(spec, PsiFamilySpec):
        return PsiFamilyModel(a=tuple(to_pair(spec.a)), rotation=tuple(to_pair(spec.rotation)), swap=spec.swap)
    if isinstance(spec, CompositeSpec):
        return CompositeModel(
            tau=tuple(to_pair(spec.tau)), gamma=tuple(to_pair(spec.gamma)), h0=tuple(to_pair(spec.h0)),
            h_prime0=tuple(to_pair(spec.h_prime0)), weights=spec.weights,
        )
    if isinstance(spec, DirectSpec):
        return DirectModel(coordinate=spec.coordinate, phase=tuple(to_pair(spec.phase)))
    raise TypeError(f"Unknown left inverse spec {type(spec).__name__}")


class MembershipRequest(BaseModel):
    domain: Literal["tetrablock", "tetrablock_alt", "g2", "cartan_I", "cartan_II"] = "tetrablock"
    point: List[Complex]


class MembershipResponse(BaseModel):
    domain: str
    inside: bool
    margin: float
    boundary: bool


class PointRequest(BaseModel):
    point: List[Complex]


class RhoResponse(BaseModel):
    rho: float


class AutRequest(BaseModel):
    point: List[Complex]
    a1: Complex = (0.0, 0.0)
    a2: Complex = (0.0, 0.0)
    theta: float = 0.0
    eta: float = 0.0
    swap: bool = False
    inverse: bool = False


class PointResponse(BaseModel):
    point: List[Complex]


class GeodesicSampleRequest(BaseModel):
    spec: GeodesicSpecModel
    samples: int = Field(16, ge=1, le=100_000)


class GeodesicRow(BaseModel):
    lam: Complex
    value: List[Complex]
    margin: float


class GeodesicSampleResponse(BaseModel):
    rows: List[GeodesicRow]


class LeftInverseRequest(BaseModel):
    spec: GeodesicSpecModel
    samples: int = Field(64, ge=1, le=10_000)


class LeftInverseResponse(BaseModel):
    left_inverse: LeftInverseModel
    residual: float
    samples: int


class LiftRequest(BaseModel):
    spec: GeodesicSpecModel
    branch: Literal[1, -1] = 1
    n: Optional[int] = None
    m: Optional[int] = None
    samples: int = Field(256, ge=1, le=100_000)


class LiftResponse(BaseModel):
    certificate: Dict[str, Any]


class SandwichRequest(BaseModel):
    w: List[Complex] = Field(..., min_length=3, max_length=3)
    z: List[Complex] = Field(..., min_length=3, max_length=3)


class SandwichResponse(BaseModel):
    lower: float
    upper: float
    notes: List[str]


class RunConfig(BaseModel):
    suite: Literal["equality", "invariance", "psh", "nonconvex"]
    n: int = Field(20, ge=1)
    seed: Optional[int] = None
    tolerances: Dict[str, float] = {}
    samples: int = Field(512, ge=1)
    budget: int = Field(100_000, ge=1)
    workers: int = Field(1, ge=1)
    archive: bool = False


class VerificationSummary(BaseModel):
    run_id: Optional[int] = None
    suite: str
    seed: int
    summary: Dict[str, Any]
    reports: List[Dict[str, Any]]


class RunRecord(BaseModel):
    model_config = {"from_attributes": True}

    id: int
    suite: str
    seed: int
    n_tasks: int
    n_pass: int
    n_fail: int
    n_inconclusive: int


class HealthResponse(BaseModel):
    status: str
    message: str
