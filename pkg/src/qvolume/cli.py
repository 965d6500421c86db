"""Command-line front door: solve, verify, extend, eval, table, plot, compare, scan.

All outputs are exact "p/q" rationals except plot columns, where decimals are
rendering derived from the exact values.  Every artifact embeds the digest of
the run manifest that produced it; identical command plus seed produces
byte-identical files.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 solver anomaly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import click

from qvolume import __version__, closedform, extension, lp_model, oracle, simplex, verifier
from qvolume.kernel import (
    Box,
    GridSolution,
    ONE,
    THREE_LEVEL,
    TWO_LEVEL,
    parse_rational,
    rational_str,
)

EXIT_VERIFICATION_FAILED = 1
EXIT_SOLVER_ANOMALY = 3


@dataclass
class RunManifest:
    """Reproducibility record embedded (sans timestamps) in every artifact."""

    command: str
    parameters: dict
    version: str = __version__
    seed: Optional[int] = None
    input_digests: dict = field(default_factory=dict)
    started_at: float = field(default_factory=time.time)

    def payload(self) -> dict:
        # timestamps stay out of the payload so digests and artifacts are
        # byte-stable across runs
        return {
            "command": self.command,
            "parameters": self.parameters,
            "version": self.version,
            "seed": self.seed,
            "inputs": self.input_digests,
        }

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def embed(self) -> dict:
        return {**self.payload(), "digest": self.digest}

    def add_input(self, path: Path):
        self.input_digests[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, document: dict, manifest: RunManifest):
    document = {**document, "manifest": manifest.embed()}
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, rows, manifest: RunManifest):
    buffer = io.StringIO()
    buffer.write(f"# manifest {manifest.digest}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    path.write_text(buffer.getvalue())


def _parse_range(text: str) -> range:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    value = int(text)
    return range(value, value + 1)


def _decimal(value, digits: int = 12) -> str:
    return f"{float(value.numerator) / float(value.denominator):.{digits}g}"


@click.group()
@click.version_option(__version__)
def main():
    """Exact extremal box volumes of multivariate quasi-copulas."""


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

_KINDS = ("min2", "max2", "min3")


def _build_model(kind: str, dimension: int, symmetric: bool) -> lp_model.LPModel:
    if symmetric:
        return lp_model.symmetrize(kind, dimension)
    builder = {
        "min2": lp_model.build_min_2grid,
        "max2": lp_model.build_max_2grid,
        "min3": lp_model.build_min_3grid,
    }[kind]
    return builder(dimension)


def _solve_spec(spec: tuple) -> dict:
    kind, dimension, symmetric, rule = spec
    model = _build_model(kind, dimension, symmetric)
    return simplex.solve(model, rule=rule).to_json()


def _solve_many(specs: list, jobs: int) -> list:
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return [
                simplex.LPSolution.from_json(data)
                for data in pool.map(_solve_spec, specs)
            ]
    return [simplex.LPSolution.from_json(_solve_spec(spec)) for spec in specs]


def _grid_from_solution(solution: simplex.LPSolution) -> Optional[GridSolution]:
    try:
        model_kind = solution.provenance.get("lp")
        if model_kind not in ("min2", "max2", "min3"):
            return None
        dimension = solution.provenance["dimension"]
        if solution.provenance.get("form") == "symmetric":
            kind = THREE_LEVEL if model_kind == "min3" else TWO_LEVEL
            return lp_model.lift_symmetric(solution.assignment, dimension, kind)
        # rebuild from the full assignment
        model = _build_model(model_kind, dimension, symmetric=False)
        return lp_model.grid_solution_from_assignment(model, solution.assignment)
    except (KeyError, ValueError):
        return None


def _record_from_grid(grid: GridSolution, kind: str) -> Optional[dict]:
    if not grid.is_symmetric:
        return None
    d = grid.dimension
    values = grid.values
    if grid.kind == TWO_LEVEL:
        level_values = [values.class_value((d - k, k)) for k in range(d + 1)]
    else:
        level_values = [values.class_value((d - k, k, 0)) for k in range(d + 1)]
    return {
        "dimension": d,
        "kind": "max" if kind == "max2" else "min",
        "a": rational_str(grid.a[0]),
        "b": rational_str(grid.b[0]),
        "q": [rational_str(q) for q in level_values],
        "volume": rational_str(grid.inner_volume()),
    }


@main.command()
@click.argument("kind", type=click.Choice(_KINDS))
@click.option("--dim", "-d", "dimension", type=int, required=True)
@click.option("--symmetric/--full", default=False)
@click.option("--rule", default="auto", type=click.Choice(["auto", "dantzig", "bland", "best"]))
@click.option("--out", type=click.Path(path_type=Path), default=None)
def solve(kind, dimension, symmetric, rule, out):
    """Solve one of the three extremal-volume programs."""
    manifest = RunManifest(
        command="solve",
        parameters={
            "kind": kind,
            "dimension": dimension,
            "symmetric": symmetric,
            "rule": rule,
        },
    )
    try:
        model = _build_model(kind, dimension, symmetric)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    try:
        solution = simplex.solve(model, rule=rule)
    except simplex.SimplexError as exc:
        click.echo(f"solver anomaly: {exc}", err=True)
        sys.exit(EXIT_SOLVER_ANOMALY)
    if solution.status != simplex.OPTIMAL:
        click.echo(f"solver finished with status {solution.status}", err=True)
        sys.exit(EXIT_SOLVER_ANOMALY)
    click.echo(f"objective {rational_str(solution.objective)}")
    grid = _grid_from_solution(solution)
    record = _record_from_grid(grid, kind) if grid is not None else None
    if record is not None:
        click.echo(
            "record a={a} b={b} q=({q}) volume={volume}".format(
                a=record["a"], b=record["b"], q=",".join(record["q"]),
                volume=record["volume"],
            )
        )
    if out is not None:
        document = {"solution": solution.to_json()}
        if grid is not None:
            document["grid"] = grid.to_json()
        if record is not None:
            document["record"] = record
        _write_json(out, document, manifest)
        click.echo(f"wrote {out}")


# ---------------------------------------------------------------------------
# verify / extend / eval
# ---------------------------------------------------------------------------

def _load_grid(path: Path) -> tuple:
    """Read a grid solution from a solve artifact or a bare grid JSON.

    Returns (grid, objective or None).
    """
    data = json.loads(path.read_text())
    objective = None
    if "grid" in data:
        grid_data = data["grid"]
        objective_str = data.get("solution", {}).get("objective")
        if objective_str is not None:
            objective = parse_rational(objective_str)
    elif "dimension" in data and "kind" in data:
        grid_data = data
    else:
        raise click.ClickException(f"{path} holds no grid solution")
    return GridSolution.from_json(grid_data), objective


@main.command()
@click.argument("solution_path", type=click.Path(exists=True, path_type=Path))
@click.option("--mode", type=click.Choice(["grid", "extension"]), default="grid")
@click.option("--samples", type=int, default=verifier.DEFAULT_SAMPLES)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def verify(solution_path, mode, samples, seed, out):
    """Check grid hypotheses, or certify the full extension pipeline."""
    manifest = RunManifest(
        command="verify",
        parameters={"mode": mode, "samples": samples, "input": solution_path.name},
        seed=seed,
    )
    manifest.add_input(solution_path)
    grid, objective = _load_grid(solution_path)
    reports = [verifier.check_grid_conditions(grid)]
    if mode == "extension":
        if reports[0].passed:
            quasi_copula = extension.extend(grid, check=False)
            reports.append(verifier.check_quasicopula(quasi_copula, samples, seed))
            reports.append(verifier.check_extension_consistency(grid, quasi_copula))
            if objective is not None:
                volume = quasi_copula.box_volume(grid.inner_box())
                ok = volume == objective
                reports[-1].checks.append(
                    verifier.CheckResult(
                        "inner-volume-roundtrip",
                        ok,
                        None if ok else f"volume {volume} != objective {objective}",
                        0 if ok else 1,
                    )
                )
    passed = all(report.passed for report in reports)
    for report in reports:
        click.echo(f"[{report.subject}]")
        click.echo(report.describe())
    if out is not None:
        _write_json(
            out,
            {"passed": passed, "reports": [r.to_json() for r in reports]},
            manifest,
        )
        click.echo(f"wrote {out}")
    if not passed:
        sys.exit(EXIT_VERIFICATION_FAILED)


@main.command("extend")
@click.argument("solution_path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None)
def extend_command(solution_path, out):
    """Construct the piecewise-multilinear extension of a grid solution."""
    manifest = RunManifest(
        command="extend", parameters={"input": solution_path.name}
    )
    manifest.add_input(solution_path)
    grid, _ = _load_grid(solution_path)
    try:
        quasi_copula = extension.extend(grid)
    except extension.ExtensionError as exc:
        click.echo(f"extension refused: {exc}", err=True)
        sys.exit(EXIT_VERIFICATION_FAILED)
    click.echo(
        f"extension built: d={quasi_copula.dimension}, "
        f"cuts per axis {[len(c) for c in quasi_copula.cuts]}"
    )
    if out is not None:
        _write_json(out, quasi_copula.to_json(), manifest)
        click.echo(f"wrote {out}")


@main.command("eval")
@click.argument("qc_path", type=click.Path(exists=True, path_type=Path))
@click.option("--point", required=True, help="comma-separated rationals, e.g. 1/2,2/3")
def eval_command(qc_path, point):
    """Evaluate a stored extension at a point of the unit cube."""
    data = json.loads(qc_path.read_text())
    if "source" not in data:
        raise click.ClickException(f"{qc_path} holds no extension")
    quasi_copula = extension.extend(
        GridSolution.from_json(data["source"]), check=False
    )
    coords = tuple(parse_rational(part) for part in point.split(","))
    value = quasi_copula.evaluate(coords)
    click.echo(rational_str(value))


# ---------------------------------------------------------------------------
# table / plot / compare / scan
# ---------------------------------------------------------------------------

@main.command()
@click.argument("kind", type=click.Choice(["min", "max"]))
@click.argument("dims")
@click.option("--source", type=click.Choice(["fixtures", "solve"]), default="fixtures")
@click.option("--jobs", type=int, default=1)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def table(kind, dims, source, jobs, fmt, out):
    """Tabulate extremal volumes per dimension (fixtures, or fresh solves)."""
    dims_range = _parse_range(dims)
    manifest = RunManifest(
        command="table",
        parameters={
            "kind": kind,
            "dims": [dims_range.start, dims_range.stop - 1],
            "source": source,
        },
    )
    rows = []
    if source == "fixtures":
        for d in dims_range:
            record = closedform.table_fixture(d, kind)
            rows.append((d, record.a, record.b, record.volume))
    else:
        specs = []
        for d in dims_range:
            model_kind = "max2" if kind == "max" else ("min2" if d >= 7 else "min3")
            specs.append((model_kind, d, True, "auto"))
        solutions = _solve_many(specs, jobs)
        for (model_kind, d, _, _), solution in zip(specs, solutions):
            grid = lp_model.lift_symmetric(
                solution.assignment,
                d,
                THREE_LEVEL if model_kind == "min3" else TWO_LEVEL,
            )
            rows.append((d, grid.a[0], grid.b[0], solution.objective))
    table_rows = [["d", "a", "b", "volume", "volume_decimal"]]
    for d, a, b, volume in rows:
        table_rows.append(
            [d, rational_str(a), rational_str(b), rational_str(volume), _decimal(volume)]
        )
    if fmt == "csv":
        _write_csv(out, table_rows, manifest)
    else:
        _write_json(
            out,
            {
                "rows": [
                    dict(zip(table_rows[0], row)) for row in table_rows[1:]
                ]
            },
            manifest,
        )
    click.echo(f"wrote {out}")


def _plot_series():
    mins = {
        d: closedform.table_fixture(d, "min").volume for d in closedform.MIN_TABLE_RANGE
    }
    maxs = {
        d: closedform.table_fixture(d, "max").volume for d in closedform.MAX_TABLE_RANGE
    }
    rows = []
    for d in sorted(set(mins) | set(maxs)):
        log_min = (
            f"{math.log2(abs(float(mins[d].numerator) / float(mins[d].denominator))):.12g}"
            if d in mins
            else ""
        )
        log_max = (
            f"{math.log2(abs(float(maxs[d].numerator) / float(maxs[d].denominator))):.12g}"
            if d in maxs
            else ""
        )
        rows.append([d, log_min, log_max])
    return rows


def _render_svg(rows) -> str:
    width, height, margin = 640, 420, 50
    xs = [row[0] for row in rows]
    values = [float(v) for row in rows for v in row[1:] if v != ""]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(values), max(values)

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        'stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 10}" text-anchor="middle" '
        'font-size="12">dimension</text>',
        f'<text x="14" y="{height // 2}" transform="rotate(-90 14 {height // 2})" '
        'text-anchor="middle" font-size="12">log2 |volume|</text>',
    ]
    for x in xs:
        parts.append(
            f'<text x="{sx(x):.1f}" y="{height - margin + 16}" text-anchor="middle" '
            f'font-size="9">{x}</text>'
        )
    for series_index, color, label in ((1, "#d95f02", "min"), (2, "#1b9e77", "max")):
        for row in rows:
            if row[series_index] == "":
                continue
            parts.append(
                f'<circle cx="{sx(row[0]):.2f}" cy="{sy(float(row[series_index])):.2f}" '
                f'r="4" fill="{color}"/>'
            )
        y_legend = margin + 16 * series_index
        parts.append(
            f'<circle cx="{margin + 12}" cy="{y_legend}" r="4" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{margin + 22}" y="{y_legend + 4}" font-size="11">'
            f"log2 |{label} volume|</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@main.command()
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="output prefix; writes <prefix>.csv and <prefix>.svg")
def plot(out):
    """Emit the log2 growth of the extremal volumes as CSV plus a small SVG."""
    manifest = RunManifest(command="plot", parameters={})
    rows = _plot_series()
    csv_path = out.with_suffix(".csv")
    svg_path = out.with_suffix(".svg")
    _write_csv(csv_path, [["d", "log2_abs_min", "log2_abs_max"], *rows], manifest)
    svg = f"<!-- manifest {manifest.digest} -->\n" + _render_svg(rows)
    svg_path.write_text(svg)
    click.echo(f"wrote {csv_path} and {svg_path}")


@main.command()
@click.argument("kind", type=click.Choice(["min", "max"]))
@click.argument("dims")
@click.option("--with-lp/--no-lp", default=True,
              help="include the symmetric LP optimum as the third value")
@click.option("--jobs", type=int, default=1)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def compare(kind, dims, with_lp, jobs, fmt, out):
    """Three-way comparison: conjectured formula vs LP optimum vs table."""
    dims_range = _parse_range(dims)
    manifest = RunManifest(
        command="compare",
        parameters={
            "kind": kind,
            "dims": [dims_range.start, dims_range.stop - 1],
            "with_lp": with_lp,
        },
    )
    lp_values = {}
    if with_lp:
        specs = []
        for d in dims_range:
            model_kind = "max2" if kind == "max" else ("min2" if d >= 7 else "min3")
            specs.append((model_kind, d, True, "auto"))
        for (_, d, _, _), solution in zip(specs, _solve_many(specs, jobs)):
            lp_values[d] = solution.objective
    records = [closedform.compare(d, kind, lp_values.get(d)) for d in dims_range]
    header = [
        "d", "kind", "formula", "lp", "table",
        "formula_matches_table", "lp_matches_table", "bound_ok", "flags",
    ]
    rows = [header]
    for record in records:
        data = record.to_json()
        rows.append(
            [
                data["dimension"], data["kind"],
                data["formula"] or "", data["lp"] or "", data["table"] or "",
                data["formula_matches_table"], data["lp_matches_table"],
                data["bound_ok"], ";".join(data["flags"]),
            ]
        )
    if fmt == "csv":
        _write_csv(out, rows, manifest)
    else:
        _write_json(out, {"rows": [r.to_json() for r in records]}, manifest)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--dim", "-d", "dimension", type=int, required=True)
@click.option("--kind", type=click.Choice(["min", "max"]), required=True)
@click.option("--resolution", "-N", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def scan(dimension, kind, resolution, fmt, out):
    """Exhaustive lattice-box scan (independent small-scale oracle)."""
    manifest = RunManifest(
        command="scan",
        parameters={"dimension": dimension, "kind": kind, "resolution": resolution},
    )
    try:
        result = oracle.grid_scan(dimension, kind, resolution)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(
        f"best {kind} {rational_str(result.best_value)} on "
        f"[{','.join(rational_str(v) for v in result.best_box.lower)}] .. "
        f"[{','.join(rational_str(v) for v in result.best_box.upper)}]"
    )
    if fmt == "csv":
        _write_csv(out, result.csv_rows(), manifest)
    else:
        _write_json(out, result.to_json(), manifest)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
