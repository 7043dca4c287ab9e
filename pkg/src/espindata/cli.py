"""Operator CLI: a thin client over the platform facade and the HTTP API.

Commands operate on a local data directory (``--data`` / ``ESD_DATA_DIR``);
``query`` and ``release list`` can alternatively target a running service
with ``--server``.  ``serve`` starts the HTTP service itself.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import EmptySelection, EsdError
from .fixtures import write_corpus
from .moderation import Attribution
from .platform import Platform
from .query import NUMERIC_FIELDS, FilterSpec, record_summary_doc

_RANGE_OPTIONS = (
    ("fiber_diameter", "--fiber-diameter"),
    ("diameter_variation", "--diameter-variation"),
    ("voltage", "--voltage"),
    ("flow_rate", "--flow-rate"),
    ("tip_collector_distance", "--distance"),
    ("spinning_duration", "--duration"),
    ("concentration", "--concentration"),
    ("temperature", "--temperature"),
    ("humidity", "--humidity"),
    ("ph", "--ph"),
)

_DEFAULT_STATS_FIELDS = "voltage,flow_rate,concentration,tip_collector_distance"


def _fail(exc: EsdError) -> None:
    click.echo(f"error ({exc.code}): {exc.message}", err=True)
    sys.exit(1)


def _platform(data_dir: str | None) -> Platform:
    if not data_dir:
        raise click.UsageError("a data directory is required (--data or ESD_DATA_DIR)")
    return Platform(data_dir=data_dir)


def _parse_range(name: str, raw: str) -> tuple[float, float]:
    parts = raw.split(":")
    if len(parts) != 2:
        raise click.UsageError(f"{name} expects min:max, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise click.UsageError(f"{name} has non-numeric bounds: {raw!r}")


def _print_report(report, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report.to_doc(), ensure_ascii=False, indent=2))
        return
    status = "PASSED" if report.passed else "FAILED"
    click.echo(f"validation {status} (catalog {report.catalog_version})")
    for violation in report.violations:
        click.echo(f"  {violation.rule_id}  {violation.field_path}: {violation.message}")


@click.group()
@click.option(
    "--data",
    "data_dir",
    envvar="ESD_DATA_DIR",
    type=click.Path(file_okay=False),
    help="Data directory (or ESD_DATA_DIR).",
)
@click.pass_context
def main(ctx: click.Context, data_dir: str | None):
    """Electrospinning experiment curation platform."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
def validate(file: str, as_json: bool):
    """Validate a record document against the rule catalog."""
    doc = json.loads(Path(file).read_text("utf-8"))
    platform = Platform()  # validation needs no data directory
    try:
        report = platform.validate_doc(doc)
    except EsdError as exc:
        _fail(exc)
        return
    _print_report(report, as_json)
    sys.exit(0 if report.passed else 1)


@main.command(name="import")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--contributor-name", default=None, help="Attribution fallback name.")
@click.option("--contributor-contact", default=None, help="Attribution fallback contact.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def import_batch(ctx, file: str, contributor_name, contributor_contact, as_json: bool):
    """Trusted batch import: validate, auto-review and accession records."""
    platform = _platform(ctx.obj["data_dir"])
    payload = json.loads(Path(file).read_text("utf-8"))
    docs = payload if isinstance(payload, list) else [payload]
    attribution = None
    if contributor_name and contributor_contact:
        attribution = Attribution(contributor_name, contributor_contact)
    try:
        summary = platform.import_batch(docs, attribution=attribution)
    except EsdError as exc:
        _fail(exc)
        return
    if as_json:
        click.echo(
            json.dumps(
                {"accepted": summary.accepted, "failures": summary.failures},
                ensure_ascii=False,
            )
        )
    else:
        click.echo(f"accepted {summary.accepted_count} of {len(docs)} record(s)")
        for index, message in summary.failures:
            click.echo(f"  record[{index}]: {message}", err=True)
    sys.exit(0 if not summary.failures else 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="ESD_PORT", default=8000, show_default=True, type=int)
@click.option(
    "--credentials",
    envvar="ESD_CREDENTIALS",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Credential file (or ESD_CREDENTIALS); without it writes are locked.",
)
@click.option(
    "--frontend",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory of built web UI assets to serve at /.",
)
@click.pass_context
def serve(ctx, host: str, port: int, credentials, frontend):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app
    from .service.auth import CredentialSet

    platform = _platform(ctx.obj["data_dir"])
    credential_set = CredentialSet.load(credentials) if credentials else CredentialSet()
    if len(credential_set) == 0:
        click.echo("warning: no credentials configured; write endpoints are locked", err=True)
    app = create_app(platform, credential_set, frontend_dir=frontend)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.group()
def release():
    """Cut and inspect versioned releases."""


@release.command(name="cut")
@click.option("--force", is_flag=True, help="Cut even without new records.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def release_cut(ctx, force: bool, as_json: bool):
    platform = _platform(ctx.obj["data_dir"])
    try:
        manifest = platform.releases.cut_release(force=force)
    except EsdError as exc:
        _fail(exc)
        return
    if as_json:
        click.echo(json.dumps(manifest.to_doc(), ensure_ascii=False))
    else:
        click.echo(
            f"cut {manifest.label}: {manifest.record_count} record(s), "
            f"dataset {manifest.dataset_digest[:23]}…"
        )


@release.command(name="list")
@click.option("--server", default=None, help="Query a running service instead.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def release_list(ctx, server, as_json: bool):
    if server:
        import httpx

        manifests = httpx.get(f"{server.rstrip('/')}/api/v1/releases").raise_for_status().json()
    else:
        platform = _platform(ctx.obj["data_dir"])
        manifests = [m.to_doc() for m in platform.releases.list_releases()]
    if as_json:
        click.echo(json.dumps(manifests, ensure_ascii=False))
        return
    if not manifests:
        click.echo("no releases")
        return
    for m in manifests:
        click.echo(f"{m['label']}  {m['released_at']}  {m['record_count']} record(s)")


def _query_options(fn):
    fn = click.option("--polymer", multiple=True)(fn)
    fn = click.option("--solvent", multiple=True)(fn)
    fn = click.option("--needle", default=None)(fn)
    fn = click.option("--collector", default=None)(fn)
    fn = click.option("--instability", multiple=True)(fn)
    fn = click.option("--shape", default=None)(fn)
    fn = click.option("--topography", default=None)(fn)
    fn = click.option("--composition", default=None)(fn)
    fn = click.option("--texture", default=None)(fn)
    fn = click.option("--defect", default=None)(fn)
    fn = click.option("--has-images/--no-has-images", "has_images", default=None)(fn)
    fn = click.option("--exclusive-polymers", is_flag=True, default=False)(fn)
    for key, flag in _RANGE_OPTIONS:
        fn = click.option(flag, key, default=None, metavar="MIN:MAX")(fn)
    return fn


@main.command()
@_query_options
@click.option("--stats", "with_stats", is_flag=True, help="Print summary statistics.")
@click.option("--fields", default=_DEFAULT_STATS_FIELDS, show_default=True)
@click.option("--limit", default=100, show_default=True, type=int)
@click.option("--offset", default=0, type=int)
@click.option("--server", default=None, help="Query a running service instead.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def query(ctx, with_stats, fields, limit, offset, server, as_json, **filters):
    """Filter accepted records and print results or statistics."""
    if server:
        _query_remote(server, filters, with_stats, fields, limit, offset, as_json)
        return

    platform = _platform(ctx.obj["data_dir"])
    ranges = {}
    for key, _flag in _RANGE_OPTIONS:
        if filters.get(key):
            ranges[key] = _parse_range(key, filters[key])
    morphology_terms = {}
    for axis in ("shape", "topography", "composition", "texture"):
        if filters.get(axis):
            morphology_terms[axis] = filters[axis]
    if filters.get("defect"):
        morphology_terms["defects"] = filters["defect"]
    spec = FilterSpec(
        polymer_ids=frozenset(filters["polymer"]) if filters["polymer"] else None,
        solvent_ids=frozenset(filters["solvent"]) if filters["solvent"] else None,
        needle_class=filters["needle"],
        collector_class=filters["collector"],
        ranges=ranges,
        morphology_terms=morphology_terms,
        instability_ids=frozenset(filters["instability"]) if filters["instability"] else None,
        has_images=filters["has_images"],
        exclusive_polymers=filters["exclusive_polymers"],
    )
    try:
        ids = platform.query.execute_filter(spec)
        if with_stats:
            field_list = [f.strip() for f in fields.split(",") if f.strip()]
            try:
                stats = platform.query.summarize(ids, field_list)
                stats_doc = stats.to_doc()
            except EmptySelection:
                stats_doc = {"n": len(ids), "fields": {f: {"n": 0} for f in field_list}}
            if as_json:
                click.echo(json.dumps(stats_doc, ensure_ascii=False, indent=2))
            else:
                click.echo(f"n = {stats_doc['n']}")
                for key, summary in stats_doc["fields"].items():
                    if summary["n"] == 0:
                        click.echo(f"{key:24s}  (no values)")
                    else:
                        click.echo(
                            f"{key:24s}  n={summary['n']:<6d} median={summary['median']:<10.4g} "
                            f"q1={summary['q1']:<10.4g} q3={summary['q3']:<10.4g}"
                        )
            return
        page = ids[offset : offset + limit]
        items = [
            record_summary_doc(platform.store.get_record(rid), platform.registry)
            for rid in page
        ]
    except EsdError as exc:
        _fail(exc)
        return
    if as_json:
        click.echo(
            json.dumps(
                {"total": len(ids), "limit": limit, "offset": offset, "items": items},
                ensure_ascii=False,
            )
        )
    else:
        click.echo(f"{len(ids)} record(s) matched")
        for item in items:
            diameter = item["fiber_diameter_nm"]
            click.echo(
                f"{item['record_id']}  {'/'.join(item['polymers']):18s} "
                f"{'/'.join(item['solvents']):14s} "
                f"{'' if diameter is None else f'{diameter:g} nm':>12s}  "
                f"{item['morphology'] or ';'.join(item['instabilities'])}"
            )


def _query_remote(server, filters, with_stats, fields, limit, offset, as_json):
    import httpx

    params: list[tuple[str, str]] = []
    for key in ("polymer", "solvent", "instability"):
        for value in filters.get(key) or ():
            params.append((key, value))
    for key in ("needle", "collector", "shape", "topography", "composition", "texture", "defect"):
        if filters.get(key):
            params.append((key, filters[key]))
    if filters.get("has_images") is not None:
        params.append(("has_images", "true" if filters["has_images"] else "false"))
    if filters.get("exclusive_polymers"):
        params.append(("exclusive_polymers", "true"))
    for key, _flag in _RANGE_OPTIONS:
        if filters.get(key):
            params.append((key, filters[key]))
    base = server.rstrip("/")
    if with_stats:
        params.append(("fields", fields))
        response = httpx.get(f"{base}/api/v1/stats/summary", params=params)
    else:
        params += [("limit", str(limit)), ("offset", str(offset))]
        response = httpx.get(f"{base}/api/v1/records", params=params)
    if response.status_code != 200:
        click.echo(f"server error {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    click.echo(json.dumps(response.json(), ensure_ascii=False, indent=2 if as_json else None))


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.pass_context
def snapshot(ctx, path: str):
    """Write a self-contained snapshot archive of the store."""
    platform = _platform(ctx.obj["data_dir"])
    try:
        manifest = platform.store.snapshot(path)
    except EsdError as exc:
        _fail(exc)
        return
    click.echo(
        f"snapshot written: {manifest.record_count} record(s), digest {manifest.digest[:23]}…"
    )


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def restore(ctx, path: str):
    """Restore a snapshot into an empty data directory."""
    platform = _platform(ctx.obj["data_dir"])
    try:
        manifest = platform.store.restore(path)
    except EsdError as exc:
        _fail(exc)
        return
    click.echo(f"restored {manifest.record_count} record(s)")


@main.command()
@click.option("--count", default=100, show_default=True, type=int)
@click.option("--seed", default=20260811, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def fixtures(count: int, seed: int, out: str):
    """Generate a synthetic submission corpus as a JSON file."""
    path = write_corpus(out, count, seed)
    click.echo(f"wrote {count} synthetic record(s) to {path}")


if __name__ == "__main__":
    main()
