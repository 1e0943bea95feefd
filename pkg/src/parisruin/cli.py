"""Command-line front end: declarative job files in, JSON or CSV out.

A job file describes one command against one model plus query grids::

    {
      "command": "sweep",
      "model": {"premium": 2.0, "claim_intensity": 1.0,
                "claims": {"kind": "exponential", "rate": 1.0}},
      "x": [0.0, 1.0, 2.0],
      "zeta": [0.5, 1.0],
      "numerics": {"inversion": {"method": "talbot"},
                   "mc": {"n_paths": 100000, "seed": 42}},
      "output": {"format": "csv", "path": "sweep.csv"}
    }

Commands: ``ruin`` (Parisian probabilities over the x/zeta grid),
``classical`` (zeta-free ruin over x), ``constant`` (x-free Parisian constant
over zeta), ``asympt-cramer`` / ``asympt-conv`` (Cramér and
convolution-equivalent asymptotics), ``simulate`` (Monte Carlo estimates),
``sweep`` (like ``ruin``, row-per-cell with per-row status), ``scale``
(W^(q)/Z^(q) over x and q).

Exit codes: 0 success, 2 invalid job/model, 3 numerical-method failure (the
failing route is named on stderr).  Sweeps keep going after per-cell failures
and mark the rows instead.  Output ordering follows the grids (x-major), so
results are reproducible byte for byte for a fixed seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Any, Callable

from .asympt import conv_data, cramer_constant
from .laplace import InversionConfig, NumericalError, QuadratureConfig
from .mc import MCConfig, estimate_parisian
from .model import DomainError, RiskModel, model_from_dict, model_to_dict
from .parisian import _natural_route, parisian_constant, parisian_ruin
from .scale import ScaleContext, classical_ruin, scale_w, scale_z
from .specfun import NonConvergenceError

_COMMANDS = (
    "ruin",
    "classical",
    "constant",
    "asympt-cramer",
    "asympt-conv",
    "simulate",
    "sweep",
    "scale",
)

_SWEEP_COLUMNS = ("x", "zeta", "probability", "route", "err_est", "constant_used", "status")


class JobError(ValueError):
    """Raised when the job file fails validation (exit code 2)."""


# ---------------------------------------------------------------------------
# job parsing
# ---------------------------------------------------------------------------


def _require_grid(job: dict, key: str) -> list[float]:
    raw = job.get(key)
    if raw is None:
        raise JobError(f"command {job['command']!r} requires a {key!r} grid")
    if isinstance(raw, (int, float)):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise JobError(f"{key!r} must be a nonempty list of numbers")
    grid = []
    for v in raw:
        f = float(v)
        if f != f or f in (float("inf"), float("-inf")):
            raise JobError(f"{key!r} values must be finite, got {v!r}")
        grid.append(f)
    return grid


def _build_inversion(payload: dict | None) -> InversionConfig:
    if not payload:
        return InversionConfig()
    known = {"method", "n_terms", "talbot_nodes", "cross_check"}
    _reject_unknown(payload, known, "numerics.inversion")
    return InversionConfig(**payload)


def _build_quadrature(payload: dict | None) -> QuadratureConfig:
    if not payload:
        return QuadratureConfig()
    known = {"rel_tol", "abs_tol", "max_subdivisions"}
    _reject_unknown(payload, known, "numerics.quadrature")
    return QuadratureConfig(**payload)


def _build_mc(payload: dict | None, seed: int | None, threads: int | None) -> MCConfig:
    payload = dict(payload or {})
    known = {
        "n_paths",
        "seed",
        "dt",
        "threads",
        "richardson",
        "upper_barrier",
        "max_time",
        "band_width",
    }
    _reject_unknown(payload, known, "numerics.mc")
    if seed is not None:
        payload["seed"] = seed
    if threads is not None:
        payload["threads"] = threads
    return MCConfig(**payload)


def _reject_unknown(payload: dict, known: set, where: str) -> None:
    unknown = set(payload) - known
    if unknown:
        raise JobError(f"unknown {where} fields: {sorted(unknown)}")


@dataclasses.dataclass(frozen=True)
class _Job:
    command: str
    model: RiskModel
    job: dict
    inversion: InversionConfig
    quadrature: QuadratureConfig
    mc: MCConfig
    out_format: str
    out_path: str | None

    @property
    def context(self) -> ScaleContext:
        return ScaleContext(self.model, inversion=self.inversion, quadrature=self.quadrature)


def _parse_job(payload: dict, args: argparse.Namespace) -> _Job:
    if not isinstance(payload, dict):
        raise JobError("job file must contain a JSON object")
    command = payload.get("command")
    if command not in _COMMANDS:
        raise JobError(f"command must be one of {_COMMANDS}, got {command!r}")
    model_payload = payload.get("model")
    if not isinstance(model_payload, dict):
        raise JobError("job file must contain a 'model' object")
    try:
        model = model_from_dict(model_payload)
    except (ValueError, KeyError, TypeError) as exc:
        raise JobError(f"invalid model: {exc}") from exc
    numerics = payload.get("numerics") or {}
    _reject_unknown(numerics, {"inversion", "quadrature", "mc"}, "numerics")
    try:
        inversion = _build_inversion(numerics.get("inversion"))
        quadrature = _build_quadrature(numerics.get("quadrature"))
        mc = _build_mc(numerics.get("mc"), args.seed, args.threads)
    except (ValueError, TypeError) as exc:
        raise JobError(f"invalid numerics: {exc}") from exc
    output = payload.get("output") or {}
    _reject_unknown(output, {"format", "path"}, "output")
    out_format = output.get("format", "json")
    if out_format not in ("json", "csv"):
        raise JobError(f"output.format must be 'json' or 'csv', got {out_format!r}")
    out_path = args.output if args.output is not None else output.get("path")
    return _Job(command, model, payload, inversion, quadrature, mc, out_format, out_path)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_ruin(job: _Job) -> list[dict]:
    ctx = job.context
    xs = _require_grid(job.job, "x")
    zetas = _require_grid(job.job, "zeta")
    rows = []
    for x in xs:
        for zeta in zetas:
            res = parisian_ruin(ctx, x, zeta, mc_config=job.mc)
            rows.append(dataclasses.asdict(res))
    return rows


def _cmd_classical(job: _Job) -> list[dict]:
    ctx = job.context
    return [
        {"x": x, "probability": classical_ruin(ctx, x)}
        for x in _require_grid(job.job, "x")
    ]


def _cmd_constant(job: _Job) -> list[dict]:
    ctx = job.context
    rows = []
    for zeta in _require_grid(job.job, "zeta"):
        value, err = parisian_constant(ctx, zeta, mc_config=job.mc)
        rows.append({"zeta": zeta, "constant": value, "err_est": err})
    return rows


def _cmd_asympt_cramer(job: _Job) -> list[dict]:
    ctx = job.context
    rows = []
    for zeta in _require_grid(job.job, "zeta"):
        data = cramer_constant(ctx, zeta, None)
        rows.append(
            {
                "zeta": zeta,
                "gamma": data.gamma,
                "mu": data.mu,
                "constant": data.constant,
                "f_c": data.f_c_at_zeta,
            }
        )
    return rows


def _cmd_asympt_conv(job: _Job) -> list[dict]:
    from .asympt import classical_tail_asymptote

    ctx = job.context
    alpha_c = float(job.job.get("alpha_c", 0.0))
    rows = []
    for zeta in _require_grid(job.job, "zeta"):
        if alpha_c > 0.0:
            constant, _ = parisian_constant(ctx, zeta, mc_config=job.mc)
        else:
            constant = 0.0  # the window bracket collapses to 1
        data = conv_data(ctx, alpha_c, zeta, constant)
        for x in _require_grid(job.job, "x"):
            rows.append(
                {
                    "x": x,
                    "zeta": zeta,
                    "alpha_c": alpha_c,
                    "asymptote": classical_tail_asymptote(ctx, alpha_c, x) * data.bracket,
                    "bracket": data.bracket,
                    "f_e": data.f_e_at_zeta,
                }
            )
    return rows


def _cmd_simulate(job: _Job) -> list[dict]:
    xs = _require_grid(job.job, "x")
    zetas = _require_grid(job.job, "zeta")
    rows = []
    for x in xs:
        for zeta in zetas:
            est = estimate_parisian(job.model, x, zeta, job.mc)
            record = dataclasses.asdict(est)
            rows.append({"x": x, "zeta": zeta, **record})
    return rows


def _cmd_scale(job: _Job) -> list[dict]:
    ctx = job.context
    xs = _require_grid(job.job, "x")
    qs = _require_grid(job.job, "q")
    rows = []
    for x in xs:
        for q in qs:
            rows.append(
                {"x": x, "q": q, "w": scale_w(ctx, x, q), "z": scale_z(ctx, x, q)}
            )
    return rows


def _cmd_sweep(job: _Job) -> tuple[list[dict], bool]:
    ctx = job.context
    xs = _require_grid(job.job, "x")
    zetas = _require_grid(job.job, "zeta")
    rows = []
    failed = False
    for x in xs:
        for zeta in zetas:
            try:
                res = parisian_ruin(ctx, x, zeta, mc_config=job.mc)
                rows.append(
                    {
                        "x": x,
                        "zeta": zeta,
                        "probability": res.probability,
                        "route": res.route,
                        "err_est": res.err_est,
                        "constant_used": res.constant_used,
                        "status": "ok",
                    }
                )
            except (NumericalError, NonConvergenceError) as exc:
                failed = True
                route = _natural_route(job.model)
                print(
                    f"numerical-method failure at x={x} zeta={zeta} "
                    f"(route {route}): {exc}",
                    file=sys.stderr,
                )
                rows.append(
                    {
                        "x": x,
                        "zeta": zeta,
                        "probability": "",
                        "route": route,
                        "err_est": "",
                        "constant_used": "",
                        "status": f"error: {type(exc).__name__}",
                    }
                )
    return rows, failed


_HANDLERS: dict[str, Callable[[_Job], list[dict]]] = {
    "ruin": _cmd_ruin,
    "classical": _cmd_classical,
    "constant": _cmd_constant,
    "asympt-cramer": _cmd_asympt_cramer,
    "asympt-conv": _cmd_asympt_conv,
    "simulate": _cmd_simulate,
    "scale": _cmd_scale,
}


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _emit(job: _Job, rows: list[dict]) -> str:
    if job.out_format == "csv":
        if job.command == "sweep":
            columns = _SWEEP_COLUMNS
        else:
            columns = tuple(rows[0].keys()) if rows else ()
            columns = tuple(c for c in columns if c != "diagnostics")
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_format_cell(row.get(c, "")) for c in columns))
        return "\n".join(lines) + "\n"
    payload = {
        "command": job.command,
        "model": model_to_dict(job.model),
        "results": rows,
    }
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(value: Any):
    item = getattr(value, "item", None)
    if callable(item):
        return item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="parisruin",
        description="Parisian ruin probabilities for spectrally negative Lévy risk models",
    )
    parser.add_argument("--config", required=True, help="path to the JSON job file")
    parser.add_argument("--output", default=None, help="override output.path from the job")
    parser.add_argument("--seed", type=int, default=None, help="override the MC seed")
    parser.add_argument("--threads", type=int, default=None, help="override MC worker threads")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        print(f"cannot read job file: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"job file is not valid JSON: {exc}", file=sys.stderr)
        return 2

    try:
        job = _parse_job(payload, args)
    except JobError as exc:
        print(f"invalid job: {exc}", file=sys.stderr)
        return 2

    try:
        if job.command == "sweep":
            rows, failed = _cmd_sweep(job)
            _write(_emit(job, rows), job.out_path)
            return 3 if failed else 0
        rows = _HANDLERS[job.command](job)
    except JobError as exc:
        print(f"invalid job: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"model outside the method's domain: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid query: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, NonConvergenceError) as exc:
        route = _natural_route(job.model)
        print(f"numerical-method failure (route {route}): {exc}", file=sys.stderr)
        return 3
    _write(_emit(job, rows), job.out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
