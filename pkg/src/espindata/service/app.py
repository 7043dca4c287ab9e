"""FastAPI application wrapping the core platform.

Every handler delegates to the same :class:`~espindata.platform.Platform`
facade the CLI uses, so HTTP results always equal the corresponding
in-process calls.  All non-2xx responses carry the ApiError envelope.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.security import HTTPAuthorizationCredentials, HTTPBearer
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import emcv
from ..errors import EmptySelection, EsdError, InvalidFilter
from ..evvr import CATALOG_VERSION, rule_catalog
from ..moderation import Attribution, ModerationState, SubmissionEnvelope
from ..platform import Platform
from ..query import NUMERIC_FIELDS, FilterSpec, record_summary_doc
from ..records import ExperimentRecord
from ..release import ARTIFACT_FILES
from .auth import CredentialSet, Principal
from .schemas import (
    ApiError,
    AuditEventOut,
    DecisionRequest,
    EnvelopeOut,
    FieldSummaryOut,
    HealthOut,
    HistogramBinOut,
    HistogramOut,
    QueryPageOut,
    RecordSummaryOut,
    ReleaseManifestOut,
    ReviseRequest,
    RuleCatalogOut,
    RuleOut,
    SubmitRequest,
    SummaryStatsOut,
    ValidationReportOut,
)

_STATUS_BY_CODE = {
    "malformed_record": 400,
    "incompatible_units": 400,
    "unknown_unit": 400,
    "malformed_descriptor": 400,
    "unknown_term": 400,
    "invalid_number": 400,
    "duplicate_defect": 400,
    "invalid_filter": 400,
    "version_unknown": 404,
    "not_found": 404,
    "unknown_release": 404,
    "unknown_artifact": 404,
    "illegal_transition": 409,
    "duplicate_accession": 409,
    "integrity_violation": 409,
    "concurrent_cut": 409,
    "concurrent_release": 409,
    "nothing_to_release": 409,
    "missing_reason": 422,
    "missing_attribution": 422,
    "empty_selection": 422,
    "io_failure": 500,
}

_ARTIFACT_MEDIA_TYPES = {
    "manifest": "application/json",
    "dataset": "text/csv; charset=utf-8",
    "dataset_xlsx": "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    "tables": "application/zip",
    "images": "application/zip",
}

# §4-style default summary fields: the four core process parameters.
_DEFAULT_STATS_FIELDS = ("voltage", "flow_rate", "concentration", "tip_collector_distance")

_bearer = HTTPBearer(auto_error=False)


def _error_response(
    status: int,
    code: str,
    detail: str,
    violations: dict | None = None,
    envelope_id: str | None = None,
) -> JSONResponse:
    body = ApiError(
        status=status, code=code, detail=detail,
        violations=violations, envelope_id=envelope_id,
    )
    return JSONResponse(status_code=status, content=body.model_dump(exclude_none=True))


def _report_out(report) -> ValidationReportOut:
    return ValidationReportOut.model_validate(report.to_doc())


def _envelope_out(envelope: SubmissionEnvelope) -> EnvelopeOut:
    return EnvelopeOut(
        envelope_id=envelope.envelope_id,
        state=envelope.state.value,
        record=envelope.to_doc()["record"],
        validation=_report_out(envelope.validation) if envelope.validation else None,
        decisions=[AuditEventOut.model_validate(e.to_doc()) for e in envelope.decisions],
        created_at=envelope.created_at,
        updated_at=envelope.updated_at,
    )


def _record_summary(record: ExperimentRecord, platform: Platform) -> RecordSummaryOut:
    return RecordSummaryOut.model_validate(record_summary_doc(record, platform.registry))


def _parse_range(name: str, raw: str | None) -> tuple[float, float] | None:
    if raw is None:
        return None
    parts = raw.split(":")
    if len(parts) != 2:
        raise InvalidFilter(f"range {name!r} must use the form min:max, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise InvalidFilter(f"range {name!r} has non-numeric bounds: {raw!r}") from None


def create_app(
    platform: Platform,
    credentials: CredentialSet | None = None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="espindata", version="0.1.0", docs_url="/api/docs")
    app.state.platform = platform
    app.state.credentials = credentials or CredentialSet()

    # -- error envelope -------------------------------------------------

    @app.exception_handler(EsdError)
    async def esd_error_handler(request: Request, exc: EsdError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return _error_response(status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(request: Request, exc: RequestValidationError):
        return _error_response(400, "malformed_body", str(exc.errors()[:3]))

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        return _error_response(exc.status_code, "http_error", str(exc.detail))

    # -- auth -------------------------------------------------------------

    def principal_of(
        auth: HTTPAuthorizationCredentials | None = Depends(_bearer),
    ) -> Principal | None:
        if auth is None:
            return None
        return app.state.credentials.verify(auth.credentials)

    def require_role(*roles: str):
        def dependency(principal: Principal | None = Depends(principal_of)) -> Principal:
            if principal is None:
                raise StarletteHTTPException(401, "a valid bearer credential is required")
            if principal.role not in roles:
                raise StarletteHTTPException(403, f"requires one of roles: {roles}")
            return principal

        return dependency

    require_contributor = require_role("contributor", "moderator")
    require_moderator = require_role("moderator")

    # -- filters ------------------------------------------------------------

    def filter_spec(
        polymer: list[str] = Query(default=None),
        solvent: list[str] = Query(default=None),
        needle: Optional[str] = None,
        collector: Optional[str] = None,
        instability: list[str] = Query(default=None),
        shape: Optional[str] = None,
        topography: Optional[str] = None,
        composition: Optional[str] = None,
        texture: Optional[str] = None,
        defect: Optional[str] = None,
        has_images: Optional[bool] = None,
        exclusive_polymers: bool = False,
        fiber_diameter: Optional[str] = None,
        diameter_variation: Optional[str] = None,
        voltage: Optional[str] = None,
        flow_rate: Optional[str] = None,
        tip_collector_distance: Optional[str] = None,
        spinning_duration: Optional[str] = None,
        concentration: Optional[str] = None,
        temperature: Optional[str] = None,
        humidity: Optional[str] = None,
        ph: Optional[str] = None,
    ) -> FilterSpec:
        ranges = {}
        for name, raw in (
            ("fiber_diameter", fiber_diameter),
            ("diameter_variation", diameter_variation),
            ("voltage", voltage),
            ("flow_rate", flow_rate),
            ("tip_collector_distance", tip_collector_distance),
            ("spinning_duration", spinning_duration),
            ("concentration", concentration),
            ("temperature", temperature),
            ("humidity", humidity),
            ("ph", ph),
        ):
            bounds = _parse_range(name, raw)
            if bounds is not None:
                ranges[name] = bounds
        morphology_terms = {}
        for axis, term in (
            ("shape", shape),
            ("topography", topography),
            ("composition", composition),
            ("texture", texture),
            ("defects", defect),
        ):
            if term is not None:
                morphology_terms[axis] = term
        spec = FilterSpec(
            polymer_ids=frozenset(polymer) if polymer else None,
            solvent_ids=frozenset(solvent) if solvent else None,
            needle_class=needle,
            collector_class=collector,
            ranges=ranges,
            morphology_terms=morphology_terms,
            instability_ids=frozenset(instability) if instability else None,
            has_images=has_images,
            exclusive_polymers=exclusive_polymers,
        )
        spec.validate()
        return spec

    # -- meta ----------------------------------------------------------------

    @app.get("/api/v1/health", response_model=HealthOut)
    def health():
        return HealthOut(status="ok", records=platform.store.count())

    @app.get("/api/v1/vocabulary/emcv")
    def vocabulary_manifest(version: str = emcv.DEFAULT_VOCABULARY_VERSION):
        return emcv.vocabulary_manifest(version)

    @app.get("/api/v1/rules", response_model=RuleCatalogOut)
    def rules():
        return RuleCatalogOut(
            catalog_version=CATALOG_VERSION,
            rules=[
                RuleOut(
                    rule_id=r.rule_id,
                    rule_class=r.rule_class.value,
                    description=r.description,
                    severity=r.severity.value,
                )
                for r in rule_catalog()
            ],
        )

    # -- submission --------------------------------------------------------

    @app.post("/api/v1/records", status_code=201, response_model=EnvelopeOut)
    def submit_record(
        body: SubmitRequest,
        principal: Principal = Depends(require_contributor),
    ):
        attribution = Attribution(body.attribution.name, body.attribution.contact)
        envelope = platform.submit_doc(body.record, attribution, identity=principal.name)
        if envelope.state is ModerationState.FLAGGED:
            return _error_response(
                422,
                "validation_failed",
                "the submission violates the rule catalog",
                violations=_report_out(envelope.validation).model_dump(),
                envelope_id=envelope.envelope_id,
            )
        return _envelope_out(envelope)

    @app.get("/api/v1/envelopes/{envelope_id}", response_model=EnvelopeOut)
    def get_envelope(envelope_id: str):
        return _envelope_out(platform.moderation.get(envelope_id))

    @app.post("/api/v1/envelopes/{envelope_id}/revise", response_model=EnvelopeOut)
    def revise_envelope(
        envelope_id: str,
        body: ReviseRequest,
        principal: Principal = Depends(require_contributor),
    ):
        envelope = platform.revise_doc(envelope_id, body.record, identity=principal.name)
        if envelope.state is ModerationState.FLAGGED:
            return _error_response(
                422,
                "validation_failed",
                "the revised record still violates the rule catalog",
                violations=_report_out(envelope.validation).model_dump(),
                envelope_id=envelope.envelope_id,
            )
        return _envelope_out(envelope)

    # -- moderation -----------------------------------------------------------

    @app.get("/api/v1/moderation/queue", response_model=list[EnvelopeOut])
    def moderation_queue(
        state: list[str] = Query(default=None),
        principal: Principal = Depends(require_moderator),
    ):
        states = state or None
        return [_envelope_out(e) for e in platform.moderation.queue(states)]

    @app.post("/api/v1/moderation/{envelope_id}/claim", response_model=EnvelopeOut)
    def claim_envelope(
        envelope_id: str,
        principal: Principal = Depends(require_moderator),
    ):
        return _envelope_out(platform.moderation.start_review(envelope_id, principal.name))

    @app.post("/api/v1/moderation/{envelope_id}/decision", response_model=EnvelopeOut)
    def decide_envelope(
        envelope_id: str,
        body: DecisionRequest,
        principal: Principal = Depends(require_moderator),
    ):
        envelope = platform.moderation.decide(
            envelope_id, body.decision, principal.name, reason=body.reason
        )
        return _envelope_out(envelope)

    # -- query ------------------------------------------------------------------

    @app.get("/api/v1/records", response_model=QueryPageOut)
    def query_records(
        spec: FilterSpec = Depends(filter_spec),
        limit: int = Query(default=100, ge=1, le=1000),
        offset: int = Query(default=0, ge=0),
    ):
        ids = platform.query.execute_filter(spec)
        page = ids[offset : offset + limit]
        items = [
            _record_summary(platform.store.get_record(record_id), platform)
            for record_id in page
        ]
        return QueryPageOut(total=len(ids), limit=limit, offset=offset, items=items)

    @app.get("/api/v1/records/{record_id}")
    def get_record(record_id: str):
        return platform.store.get_record_doc(record_id)

    @app.get("/api/v1/stats/summary", response_model=SummaryStatsOut)
    def stats_summary(
        spec: FilterSpec = Depends(filter_spec),
        fields: str = Query(default=",".join(_DEFAULT_STATS_FIELDS)),
    ):
        field_list = [f.strip() for f in fields.split(",") if f.strip()]
        for key in field_list:
            if key not in NUMERIC_FIELDS:
                raise InvalidFilter(f"unknown numeric field {key!r}")
        ids = platform.query.execute_filter(spec)
        try:
            stats = platform.query.summarize(ids, field_list)
        except EmptySelection:
            return SummaryStatsOut(
                n=len(ids), fields={key: FieldSummaryOut(n=0) for key in field_list}
            )
        return SummaryStatsOut(
            n=stats.n,
            fields={
                key: FieldSummaryOut.model_validate(summary.to_doc())
                for key, summary in stats.fields.items()
            },
        )

    @app.get("/api/v1/stats/histogram", response_model=HistogramOut)
    def stats_histogram(
        field: str,
        spec: FilterSpec = Depends(filter_spec),
        bins: int = Query(default=20, ge=1, le=200),
    ):
        ids = platform.query.execute_filter(spec)
        try:
            histogram = platform.query.histogram(ids, field, bins)
        except EmptySelection:
            return HistogramOut(n=0, field=field, bins=[])
        total = sum(count for _, _, count in histogram)
        return HistogramOut(
            n=total,
            field=field,
            bins=[HistogramBinOut(lower=lo, upper=hi, count=c) for lo, hi, c in histogram],
        )

    # -- releases ---------------------------------------------------------------

    @app.get("/api/v1/releases", response_model=list[ReleaseManifestOut])
    def list_releases():
        return [
            ReleaseManifestOut.model_validate(m.to_doc())
            for m in platform.releases.list_releases()
        ]

    @app.post("/api/v1/releases/cut", response_model=ReleaseManifestOut, status_code=201)
    def cut_release(
        force: bool = False,
        principal: Principal = Depends(require_moderator),
    ):
        manifest = platform.releases.cut_release(force=force)
        return ReleaseManifestOut.model_validate(manifest.to_doc())

    @app.get("/api/v1/releases/{label}/{artifact}")
    def fetch_release(label: str, artifact: str):
        payload = platform.releases.fetch_release(label, artifact)
        media_type = _ARTIFACT_MEDIA_TYPES.get(artifact, "application/octet-stream")
        filename = f"{label}-{ARTIFACT_FILES[artifact]}"
        return Response(
            content=payload,
            media_type=media_type,
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    # -- static frontend -----------------------------------------------------------

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
