"""Figure sweeps, CSV/JSON output and verification against expectation files."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import analytic
from .simulator import LatencyModel, finish_times, make_layout, summarize

log = logging.getLogger(__name__)

FIGURES = ("fig4", "fig5", "fig6", "fig7", "fig8", "custom")
SIM_FIELDS = ("figure", "scheme", "N", "k", "r", "order", "rate", "trials", "metric", "mean",
              "stderr", "undecodable", "seed", "config_hash")
FIG4_FIELDS = ("figure", "t", "scheme", "method", "pr_noncompletion", "tv_distance", "mass",
               "seed", "config_hash")
NO_ORDER = "-"
FIG5_N = tuple(range(600, 2401, 200))
FIGURE_SCHEMES = ("multiple_mds", "product", "single_mds")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep.  ``orders`` applies to the product scheme only.

    For fig6 ``r`` holds the two tile sides whose per-trial ratio is taken.
    ``out`` and ``threads`` do not enter the config hash.
    """

    figure: str = "custom"
    schemes: tuple[str, ...] = ("product",)
    N: tuple[int, ...] = (600,)
    k: tuple[int, ...] = (20,)
    r: tuple[int, ...] = (1,)
    orders: tuple[str, ...] = ("diagonal",)
    rate: tuple[float, ...] = (1.0,)
    trials: int = 20_000
    seed: int = 2024
    t_grid: tuple[float, ...] = ()
    analytic_params: dict = field(default_factory=dict)
    out: str | None = None
    threads: int = 1

    def __post_init__(self):
        for name in ("schemes", "N", "k", "r", "orders", "rate", "t_grid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "analytic_params", dict(self.analytic_params))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def hashed_fields(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("threads")
        return d

    def content_hash(self) -> str:
        """Git blob hash of the canonical JSON of the result-affecting fields."""
        body = json.dumps(self.hashed_fields(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

    def validate(self) -> None:
        if self.figure not in FIGURES:
            raise ValueError(f"unknown figure {self.figure!r}; expected one of {FIGURES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.figure == "fig4":
            if not self.t_grid:
                raise ValueError("fig4 needs a non-empty t_grid")
            return
        for name in ("schemes", "N", "k", "r", "orders", "rate"):
            if not getattr(self, name):
                raise ValueError(f"parameter grid {name!r} is empty")
        if self.figure == "fig6" and len(self.r) != 2:
            raise ValueError("fig6 needs exactly two r values (numerator, denominator)")
        for rate in self.rate:
            LatencyModel.exponential(rate)
        for scheme, N, k, r, order in self._cells():
            make_layout(scheme, N, k, r, order if order != NO_ORDER else "diagonal")

    def _cells(self):
        for scheme in self.schemes:
            orders = self.orders if scheme == "product" else (NO_ORDER,)
            for N in self.N:
                for k in self.k:
                    for r in self.r:
                        for order in orders:
                            yield scheme, N, k, r, order


def preset(figure: str, **overrides) -> ExperimentConfig:
    base: dict[str, Any] = {"figure": figure}
    if figure == "fig4":
        base.update(schemes=("sub_blocked", "baseline"), t_grid=tuple(float(t) for t in range(1, 41)),
                    analytic_params={"n": 10, "l": 10, "k": 40, "gamma_rate": 0.5, "sigma": 2.0})
    elif figure == "fig5":
        base.update(schemes=FIGURE_SCHEMES, N=FIG5_N, r=(1, 2), orders=("random",))
    elif figure == "fig6":
        base.update(schemes=FIGURE_SCHEMES, N=FIG5_N, r=(1, 4), orders=("diagonal",))
    elif figure == "fig7":
        base.update(schemes=FIGURE_SCHEMES, r=tuple(range(1, 9)), orders=("diagonal",))
    elif figure == "fig8":
        base.update(schemes=("product",), r=tuple(range(1, 9)), orders=("column", "random", "diagonal"))
    elif figure != "custom":
        raise ValueError(f"unknown figure {figure!r}; expected one of {FIGURES}")
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**base)


def row_key(row: dict) -> str:
    if row["figure"] == "fig4":
        return f"{row['scheme']}/{row['method']}/t={_fmt(row['t'])}"
    return f"{row['scheme']}/N={row['N']}/r={row['r']}/order={row['order']}"


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _fig4_rows(cfg: ExperimentConfig, h: str) -> list[dict]:
    params = {"n": 10, "l": 10, "k": 40, "gamma_rate": 0.5, "sigma": 2.0} | cfg.analytic_params
    rows = []
    for p in analytic.noncompletion_curve(cfg.t_grid, **params):
        for scheme, method, value, tv, mass in (
            ("sub_blocked", "exact", p.exact, "", ""),
            ("sub_blocked", "gaussian", p.gaussian, p.tv_distance, p.mass),
            ("baseline", "exact", p.baseline, "", ""),
        ):
            if scheme in cfg.schemes:
                rows.append({"figure": "fig4", "t": p.t, "scheme": scheme, "method": method,
                             "pr_noncompletion": value, "tv_distance": tv, "mass": mass,
                             "seed": cfg.seed, "config_hash": h})
    return rows


def _samples(cfg: ExperimentConfig, scheme, N, k, r, order, rate, cache) -> np.ndarray:
    o = order if order != NO_ORDER else "diagonal"
    if r == 1:
        o = "diagonal"  # every order is the same single cell
    key = (scheme, N, k, r, o, rate, cfg.trials, cfg.seed)
    if cache is not None and key in cache:
        return cache[key]
    out = finish_times(scheme, N, k, r, o, LatencyModel.exponential(rate), cfg.trials, cfg.seed, cfg.threads)
    if cache is not None:
        cache[key] = out
    return out


def _sim_rows(cfg: ExperimentConfig, h: str, cache: dict | None) -> list[dict]:
    rows = []
    base = {"figure": cfg.figure, "seed": cfg.seed, "config_hash": h, "trials": cfg.trials}
    for rate in cfg.rate:
        if cfg.figure == "fig6":
            r_num, r_den = cfg.r
            for scheme in cfg.schemes:
                orders = cfg.orders if scheme == "product" else (NO_ORDER,)
                for N in cfg.N:
                    for k in cfg.k:
                        for order in orders:
                            # same seed => same T_i in both runs (common random numbers)
                            num = _samples(cfg, scheme, N, k, r_num, order, rate, cache)
                            den = _samples(cfg, scheme, N, k, r_den, order, rate, cache)
                            s = summarize(num / den)
                            rows.append(base | {"scheme": scheme, "N": N, "k": k, "r": f"{r_num}:{r_den}",
                                                "order": order, "rate": rate, "metric": "ratio_mean",
                                                "mean": s.mean, "stderr": s.standard_error,
                                                "undecodable": s.undecodable_count})
            continue
        for scheme, N, k, r, order in cfg._cells():
            s = summarize(_samples(cfg, scheme, N, k, r, order, rate, cache))
            rows.append(base | {"scheme": scheme, "N": N, "k": k, "r": r, "order": order, "rate": rate,
                                "metric": "mean_finish_time", "mean": s.mean, "stderr": s.standard_error,
                                "undecodable": s.undecodable_count})
    return rows


def compute(cfg: ExperimentConfig, cache: dict | None = None) -> list[dict]:
    """Validate then run the sweep; rows come out in grid order.

    ``cache`` (a plain dict) memoizes per-trial samples across sweeps that
    share cells, e.g. the product column of fig7 and the diagonal of fig8.
    """
    cfg.validate()
    h = cfg.content_hash()
    if cfg.figure == "fig4":
        return _fig4_rows(cfg, h)
    return _sim_rows(cfg, h, cache)


def csv_body(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields = FIG4_FIELDS if rows[0]["figure"] == "fig4" else SIM_FIELDS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(row[f]) for f in fields])
    return buf.getvalue()


def strip_header(text: str) -> str:
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def write_outputs(rows: list[dict], cfg: ExperimentConfig, path: str | Path) -> tuple[Path, Path]:
    """CSV (one timestamp comment line, then the body) plus a JSON mirror."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        path.write_text(f"# generated {stamp} config_hash={cfg.content_hash()}\n" + csv_body(rows))
        mirror = path.with_suffix(".json")
        mirror.write_text(json.dumps({"config": cfg.hashed_fields(), "config_hash": cfg.content_hash(),
                                      "rows": rows}, indent=1, default=_json_default) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path, mirror


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


def run(cfg: ExperimentConfig, cache: dict | None = None) -> list[dict]:
    rows = compute(cfg, cache)
    if cfg.out:
        write_outputs(rows, cfg, cfg.out)
    return rows


# ---------------------------------------------------------------- verification

@dataclass(frozen=True)
class Comparison:
    figure: str
    key: str
    expected: float
    observed: float | None
    stderr: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.observed is None:
            return f"{status} {self.figure} {self.key}: {self.note}"
        dev = (self.observed - self.expected) / self.expected if self.expected else float("nan")
        return (f"{status} {self.figure} {self.key}: observed {self.observed:.6g} "
                f"(se {self.stderr:.2g}) expected {self.expected:.6g} "
                f"tol {self.tolerance:.3g} dev {dev:+.2%}")


@dataclass
class VerifyReport:
    comparisons: list[Comparison]
    rows: dict[str, list[dict]]
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def lines(self) -> list[str]:
        return [f"WARNING {w}" for w in self.warnings] + [c.line() for c in self.comparisons]


def default_expectations() -> Path:
    return Path(str(resources.files("codedcomp") / "data" / "published_coordinates.json"))


def load_expectations(path: str | Path) -> dict[str, dict[str, dict]]:
    data = json.loads(Path(path).read_text() or "{}")
    if not isinstance(data, dict):
        raise ValueError("expectations file must map figure -> {row key -> entry}")
    for fig, entries in data.items():
        if fig not in FIGURES:
            raise ValueError(f"unknown figure {fig!r} in expectations")
        for key, e in entries.items():
            if "value" not in e or ("rel_tol" not in e and "abs_tol" not in e):
                raise ValueError(f"expectation {fig}:{key} needs 'value' and a tolerance")
    return data


def tolerance(entry: dict, stderr: float) -> float:
    """Largest of the relative, absolute and standard-error allowances."""
    v = float(entry["value"])
    return max(entry.get("rel_tol", 0.0) * abs(v), entry.get("abs_tol", 0.0),
               entry.get("se_mult", 0.0) * (stderr if math.isfinite(stderr) else 0.0))


def compare(figure: str, rows: Iterable[dict], entries: dict[str, dict]) -> list[Comparison]:
    by_key = {row_key(r): r for r in rows}
    out = []
    for key, e in entries.items():
        row = by_key.get(key)
        exp = float(e["value"])
        if row is None:
            out.append(Comparison(figure, key, exp, None, float("nan"), float("nan"), False,
                                  "missing: no output row has this key"))
            continue
        value = float(row["pr_noncompletion"] if figure == "fig4" else row["mean"])
        se = 0.0 if figure == "fig4" else float(row["stderr"])
        tol = tolerance(e, se)
        out.append(Comparison(figure, key, exp, value, se, tol, abs(value - exp) <= tol))
    return out


def verify(expectations: str | Path | dict, figure: str | None = None, cache: dict | None = None,
           **overrides) -> VerifyReport:
    """Run every figure named in the expectations (or only ``figure``) and compare.

    ``overrides`` (trials, seed, threads, ...) are applied to each preset.
    With ``out`` given as a directory, each figure's CSV is written there.
    """
    data = expectations if isinstance(expectations, dict) else load_expectations(expectations)
    out_dir = overrides.pop("out", None)
    figures = [figure] if figure else list(data)
    report = VerifyReport([], {})
    if not any(data.get(f) for f in figures):
        report.warnings.append("no expectations to check; vacuous pass")
        log.warning("expectations file is empty; vacuous pass")
        return report
    for fig in figures:
        entries = data.get(fig, {})
        if not entries:
            continue
        cfg = preset(fig, **overrides)
        if out_dir:
            cfg = cfg.replace(out=str(Path(out_dir) / f"{fig}.csv"))
        rows = run(cfg, cache)
        report.rows[fig] = rows
        report.comparisons.extend(compare(fig, rows, entries))
    return report
