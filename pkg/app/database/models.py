from datetime import datetime

from sqlalchemy import Column, DateTime, ForeignKey, Integer, String, Text
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import relationship

Base = declarative_base()


class VerificationRun(Base):
    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, index=True)
    suite = Column(String, index=True)
    seed = Column(Integer)
    n_tasks = Column(Integer)
    n_pass = Column(Integer)
    n_fail = Column(Integer)
    n_inconclusive = Column(Integer)
    config_json = Column(Text)
    created_at = Column(DateTime, default=datetime.utcnow)

    reports = relationship("ReportRecord", back_populates="run", cascade="all, delete-orphan")


class ReportRecord(Base):
    __tablename__ = "verification_reports"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("verification_runs.id"), index=True)
    task_index = Column(Integer)
    status = Column(String, index=True)
    payload = Column(Text)

    run = relationship("VerificationRun", back_populates="reports")
