"""Pydantic request/response models for the JSON API."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class AttributionIn(BaseModel):
    name: str
    contact: str


class SubmitRequest(BaseModel):
    record: dict[str, Any]
    attribution: AttributionIn


class ReviseRequest(BaseModel):
    record: dict[str, Any]


class DecisionRequest(BaseModel):
    decision: Literal["accept", "reject"]
    reason: Optional[str] = None


class ViolationOut(BaseModel):
    rule_id: str
    field_path: str
    observed: str
    message: str


class ValidationReportOut(BaseModel):
    record_ref: str
    catalog_version: str
    passed: bool
    violations: list[ViolationOut]
    evaluated_at: str


class AuditEventOut(BaseModel):
    actor: str
    identity: str
    action: str
    reason: Optional[str] = None
    at: str


class EnvelopeOut(BaseModel):
    envelope_id: str
    state: str
    record: dict[str, Any]
    validation: Optional[ValidationReportOut] = None
    decisions: list[AuditEventOut]
    created_at: str
    updated_at: str


class ApiError(BaseModel):
    """Envelope for every non-2xx response."""

    status: int
    code: str
    detail: str
    violations: Optional[ValidationReportOut] = None
    envelope_id: Optional[str] = None


class RecordSummaryOut(BaseModel):
    record_id: str
    polymers: list[str]
    solvents: list[str]
    needle_class: Optional[str] = None
    collector_class: Optional[str] = None
    concentration_wtpct: Optional[float] = None
    voltage_kv: Optional[float] = None
    flow_rate_ml_h: Optional[float] = None
    distance_cm: Optional[float] = None
    fiber_diameter_nm: Optional[float] = None
    morphology: Optional[str] = None
    instabilities: list[str] = Field(default_factory=list)
    image_count: int = 0


class QueryPageOut(BaseModel):
    total: int
    limit: int
    offset: int
    items: list[RecordSummaryOut]


class FieldSummaryOut(BaseModel):
    n: int
    median: Optional[float] = None
    q1: Optional[float] = None
    q3: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None


class HistogramBinOut(BaseModel):
    lower: float
    upper: float
    count: int


class SummaryStatsOut(BaseModel):
    n: int
    fields: dict[str, FieldSummaryOut]


class HistogramOut(BaseModel):
    n: int
    field: str
    bins: list[HistogramBinOut]


class RuleOut(BaseModel):
    rule_id: str
    rule_class: str
    description: str
    severity: str


class RuleCatalogOut(BaseModel):
    catalog_version: str
    rules: list[RuleOut]


class ReleaseManifestOut(BaseModel):
    label: str
    released_at: str
    record_count: int
    dataset_digest: str
    images_digest: str
    vocabulary_version: str
    catalog_version: str


class HealthOut(BaseModel):
    status: str
    records: int
