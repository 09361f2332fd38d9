"""Run configuration, result cache, and CSV/JSON emission.

Cache records are one JSON file per key under cache_dir.  The key is a
content hash of everything that determines the numbers (target, degree,
constrained flag, precision, tolerance, grid density, solver version), so
any algorithmic change invalidates old entries by construction.  Writes go
through a temporary file and os.replace, which makes concurrent writers
safe and guarantees readers never see a torn record; unreadable records are
treated as misses.

Scalars are serialized exactly (gmpy2.to_binary, base64) with a readable
decimal rendering alongside; a round trip at the same precision is
bit-identical.  CSV and JSON render numbers through the deterministic
formatter, so identical configurations emit identical bytes, with the
timestamp confined to a comment line (CSV) or a dedicated field (JSON).
The wall_ms column reports the time of the original computation, cached
along with the result.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

import gmpy2

from .cheb import ChebPoly
from .convex_sip import ConvexApproxResult
from .precision import Scalar, format_scalar, to_scalar
from .remez import ApproxResult, Reference

SOLVER_VERSION = "cvxremez-1"

CSV_COLUMNS = [
    "n",
    "lambda",
    "half_width",
    "constrained",
    "e_lower",
    "e_upper",
    "scaled_lower",
    "scaled_upper",
    "equioscillation_ratio",
    "convexity_slack",
    "iterations",
    "status",
    "wall_ms",
]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    precision_bits: int = 256
    tol_rel: Scalar = field(default_factory=lambda: to_scalar("1e-10"))
    grid_factor: int = 32
    n_min: int = 0
    n_max: int = 0
    lambda_list: list = field(default_factory=lambda: [to_scalar(1)])
    constrained: bool = False
    model_order: int = 1
    windows: list = field(default_factory=list)
    half_width: Scalar = field(default_factory=lambda: to_scalar(1))
    cache_dir: Optional[str] = None
    output: str = "-"
    format: str = "csv"
    strict: bool = False

    def validate(self):
        if self.precision_bits < 64:
            raise ConfigError("precision_bits must be >= 64")
        if not (0 <= self.n_min <= self.n_max):
            raise ConfigError("need 0 <= n_min <= n_max")
        self.tol_rel = to_scalar(self.tol_rel)
        if not (0 < self.tol_rel <= to_scalar("1e-3")):
            raise ConfigError("tol_rel must lie in (0, 1e-3]")
        # the solver cannot certify below the arithmetic noise floor
        floor = gmpy2.exp2(-(self.precision_bits - 32))
        if self.tol_rel < floor:
            raise ConfigError(
                f"tol_rel {format_scalar(self.tol_rel, 6)} is inconsistent with "
                f"{self.precision_bits}-bit precision (floor {format_scalar(floor, 6)}); "
                "raise precision_bits or loosen tol_rel"
            )
        if self.grid_factor < 8:
            raise ConfigError("grid_factor must be >= 8")
        if not self.lambda_list:
            raise ConfigError("need at least one lambda")
        self.lambda_list = [to_scalar(v) for v in self.lambda_list]
        for lam in self.lambda_list:
            if not lam > 0:
                raise ConfigError("lambda values must be > 0")
            if self.constrained and lam < 1:
                raise ConfigError(
                    f"target not convex: |x|**{format_scalar(lam, 6)} with exponent < 1"
                )
        self.half_width = to_scalar(self.half_width)
        if not self.half_width > 0:
            raise ConfigError("half_width must be > 0")
        if self.model_order < 1:
            raise ConfigError("model_order must be >= 1")
        for lo, hi in self.windows:
            if not (0 <= lo <= hi):
                raise ConfigError(f"bad window {lo}..{hi}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        return self

    def echo(self) -> dict:
        return {
            "precision_bits": self.precision_bits,
            "tol_rel": format_scalar(self.tol_rel, 24),
            "grid_factor": self.grid_factor,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "lambda_list": [format_scalar(v, 24) for v in self.lambda_list],
            "constrained": self.constrained,
            "model_order": self.model_order,
            "windows": [f"{lo}..{hi}" for lo, hi in self.windows],
            "half_width": format_scalar(self.half_width, 24),
            "cache_dir": self.cache_dir,
            "output": self.output,
            "format": self.format,
            "strict": self.strict,
            "solver_version": SOLVER_VERSION,
        }


# ---------------------------------------------------------------------------
# exact Scalar serialization

def scalar_to_json(x) -> dict:
    x = to_scalar(x)
    return {
        "bin": base64.b64encode(gmpy2.to_binary(x)).decode("ascii"),
        "dec": format_scalar(x, 30),
    }


def scalar_from_json(obj) -> Scalar:
    return gmpy2.from_binary(base64.b64decode(obj["bin"]))


def _opt_scalar_to_json(x):
    return None if x is None else scalar_to_json(x)


def _opt_scalar_from_json(obj):
    return None if obj is None else scalar_from_json(obj)


# ---------------------------------------------------------------------------
# result payloads

def result_to_payload(r) -> dict:
    if isinstance(r, ApproxResult):
        return {
            "type": "approx",
            "degree": r.degree,
            "coeffs": [scalar_to_json(c) for c in r.polynomial.coeffs],
            "error_lower": scalar_to_json(r.error_lower),
            "error_upper": scalar_to_json(r.error_upper),
            "equioscillation_ratio": scalar_to_json(r.equioscillation_ratio),
            "iterations": r.iterations,
            "reference": [scalar_to_json(x) for x in r.reference.nodes],
        }
    if isinstance(r, ConvexApproxResult):
        return {
            "type": "convex",
            "degree": r.degree,
            "coeffs": [scalar_to_json(c) for c in r.polynomial.coeffs],
            "error_lower": scalar_to_json(r.error_lower),
            "error_upper": scalar_to_json(r.error_upper),
            "convexity_slack": scalar_to_json(r.convexity_slack),
            "cut_rounds": r.cut_rounds,
            "n_error_cuts": r.n_error_cuts,
            "n_convexity_cuts": r.n_convexity_cuts,
        }
    raise TypeError(f"cannot serialize {type(r).__name__}")


def payload_to_result(payload: dict):
    poly = ChebPoly([scalar_from_json(c) for c in payload["coeffs"]])
    if payload["type"] == "approx":
        return ApproxResult(
            degree=payload["degree"],
            polynomial=poly,
            error_lower=scalar_from_json(payload["error_lower"]),
            error_upper=scalar_from_json(payload["error_upper"]),
            equioscillation_ratio=scalar_from_json(payload["equioscillation_ratio"]),
            iterations=payload["iterations"],
            reference=Reference(tuple(scalar_from_json(x) for x in payload["reference"])),
        )
    if payload["type"] == "convex":
        return ConvexApproxResult(
            degree=payload["degree"],
            polynomial=poly,
            error_lower=scalar_from_json(payload["error_lower"]),
            error_upper=scalar_from_json(payload["error_upper"]),
            convexity_slack=scalar_from_json(payload["convexity_slack"]),
            cut_rounds=payload["cut_rounds"],
            n_error_cuts=payload["n_error_cuts"],
            n_convexity_cuts=payload["n_convexity_cuts"],
        )
    raise ValueError(f"unknown payload type {payload.get('type')!r}")


# ---------------------------------------------------------------------------
# cache

def cache_key(
    kind: str,
    lam,
    half_width,
    scale,
    n: int,
    constrained: bool,
    precision_bits: int,
    tol_rel,
    grid_factor: int,
) -> str:
    parts = "|".join(
        [
            SOLVER_VERSION,
            kind,
            format_scalar(lam, 40),
            format_scalar(half_width, 40),
            format_scalar(scale, 40),
            str(n),
            "1" if constrained else "0",
            str(precision_bits),
            format_scalar(tol_rel, 40),
            str(grid_factor),
        ]
    )
    return hashlib.sha256(parts.encode("ascii")).hexdigest()


def cache_load(cache_dir, key: str) -> Optional[dict]:
    if not cache_dir:
        return None
    path = os.path.join(cache_dir, key + ".json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rec = json.load(fh)
    except (OSError, ValueError):
        return None
    if rec.get("key") != key:
        return None
    return rec


def cache_store(cache_dir, key: str, value: dict) -> None:
    if not cache_dir:
        return
    os.makedirs(cache_dir, exist_ok=True)
    rec = dict(value)
    rec["key"] = key
    rec["created_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    path = os.path.join(cache_dir, key + ".json")
    fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(rec, fh, sort_keys=True)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# emission

def _cell(value, digits=24) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return str(int(round(value)))
    return format_scalar(value, digits)


def row_to_cells(row) -> list:
    return [
        str(row.n),
        format_scalar(row.lam, 24),
        format_scalar(row.half_width, 24),
        "1" if row.constrained else "0",
        _cell(row.e_lower),
        _cell(row.e_upper),
        _cell(row.scaled_lower),
        _cell(row.scaled_upper),
        _cell(row.equioscillation_ratio),
        _cell(row.convexity_slack),
        "" if row.iterations is None else str(row.iterations),
        row.status,
        _cell(row.wall_ms),
    ]


def emit_csv(rows, config: RunConfig, fh, report_comments=()) -> None:
    fh.write(f"# {SOLVER_VERSION}\n")
    fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}\n")
    fh.write(f"# config: {json.dumps(config.echo(), sort_keys=True)}\n")
    for line in report_comments:
        fh.write(f"# {line}\n")
    fh.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        fh.write(",".join(row_to_cells(row)) + "\n")


def report_to_dict(report, boundedness=None) -> dict:
    out = {
        "method": report.method,
        "model_order": report.model_order,
        "estimates": [
            {"window": desc, "estimate": format_scalar(v, 24)}
            for desc, v in report.estimates
        ],
        "spread": format_scalar(report.spread, 24),
        "stable": report.stable,
        "stability_threshold": format_scalar(report.stability_threshold, 24),
    }
    if boundedness is not None:
        sup, ratio = boundedness
        out["boundedness_sup"] = format_scalar(sup, 24)
        out["tail_increase_ratio"] = format_scalar(ratio, 24)
    return out


def emit_json(rows, config: RunConfig, fh, reports=None) -> None:
    doc = {
        "generated": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": config.echo(),
        "rows": [dict(zip(CSV_COLUMNS, row_to_cells(r))) for r in rows],
    }
    if reports is not None:
        doc["report"] = reports
    json.dump(doc, fh, indent=2, sort_keys=True)
    fh.write("\n")
