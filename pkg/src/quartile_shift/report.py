"""Analysis reports, input parsing and file formats.

The structured report is JSON: reals are stored at full precision (so a file
reparses to the in-memory values) and infinite endpoints as "inf"/"-inf".
The text rendering rounds reals to 6 significant digits and p-values to 4
decimals.  Figure data goes to flat tab-separated files.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import re
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from ._backend import BACKEND
from .attributable import attributable_bound
from .gmm import UnboundedMinimizerError, g2_curve, gmm_confidence_set, gmm_estimate
from .hypergeom import EXACT_BUDGET
from .rank import (
    ConfidenceSet,
    _use_exact,
    deviate_test,
    fit_test,
    hl_estimate,
    invert_rank_test,
    resolve_weights,
    segment_pvalues,
)
from .shift_table import TIE_RULE, ShiftTrajectory, TwoSample, change_points

DEFAULT_LEVELS = (2 / 3, 0.90, 0.95)


class InputError(ValueError):
    """Unreadable or invalid user input."""


# ---------------------------------------------------------------- input


def parse_values(path: str | Path) -> np.ndarray:
    """One observation per line; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        try:
            v = float(s)
        except ValueError:
            raise InputError(f"{path}:{lineno}: cannot parse {s!r} as a number") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: observation must be finite, got {s!r}")
        out.append(v)
    if not out:
        raise InputError(f"{path}: no observations")
    return np.array(out)


_CONTROL = {"x", "control", "c", "0"}
_TREATED = {"y", "treated", "t", "exposed", "1"}


def parse_grouped(path: str | Path) -> TwoSample:
    """Delimited file with a group column and a value column.

    Groups x/control/c/0 and y/treated/t/exposed/1 are recognized; a header
    row whose value column is not numeric is skipped.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    x, y = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        parts = [p for p in re.split(r"[,\t; ]+", s) if p]
        if len(parts) != 2:
            raise InputError(f"{path}:{lineno}: expected 'group value', got {s!r}")
        group, raw = parts[0].strip().lower(), parts[1]
        try:
            v = float(raw)
        except ValueError:
            if not x and not y:
                continue  # header
            raise InputError(f"{path}:{lineno}: cannot parse {raw!r} as a number") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: observation must be finite, got {raw!r}")
        if group in _CONTROL:
            x.append(v)
        elif group in _TREATED:
            y.append(v)
        else:
            raise InputError(f"{path}:{lineno}: unknown group {parts[0]!r}")
    if not x:
        raise InputError(f"{path}: no control observations")
    if not y:
        raise InputError(f"{path}: no treated observations")
    return make_sample(x, y)


def make_sample(x, y) -> TwoSample:
    try:
        return TwoSample(x, y)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def input_digest(data: TwoSample) -> str:
    text = "x:" + ",".join(repr(float(v)) for v in data.x) + ";y:" + ",".join(repr(float(v)) for v in data.y)
    return hashlib.sha256(text.encode()).hexdigest()


def fivenum(values) -> tuple[float, float, float, float, float]:
    """Tukey's five-number summary (minimum, lower hinge, median, upper hinge, maximum)."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    n4 = math.floor((n + 3) / 2) / 2
    d = np.array([1, n4, (n + 1) / 2, n + 1 - n4, n]) - 1
    return tuple(float(0.5 * (v[int(math.floor(i))] + v[int(math.ceil(i))])) for i in d)


# ---------------------------------------------------------------- serialization


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    return obj


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def loads(text: str):
    """Inverse of :func:`dumps` (infinite endpoints come back as floats)."""
    return _restore(json.loads(text))


def write_table(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_table(path: str | Path) -> tuple[list[str], list[list]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    header, body = rows[0], rows[1:]

    def conv(s):
        try:
            return int(s)
        except ValueError:
            try:
                return float(s)
            except ValueError:
                return s

    return header, [[conv(s) for s in row] for row in body]


# ---------------------------------------------------------------- analysis


def _set_doc(cs: ConfidenceSet, mode: str) -> dict:
    return {
        "nominal_level": cs.nominal_level,
        "attained_level": cs.attained_level,
        "mode": mode,
        "intervals": [list(iv) for iv in cs.intervals],
        "enclosing_interval": list(cs.enclosing_interval),
        "is_interval": cs.is_interval,
        "warning": cs.warning,
    }


def _test_doc(t) -> dict:
    return {
        "delta0": t.delta0,
        "statistic": t.statistic,
        "reference": t.reference,
        "asymptotic_p": t.asymptotic_p,
        "exact_p": t.exact_p,
        "mode": t.mode,
    }


def analyze(
    data: TwoSample,
    weights: Sequence[str] = ("hl", "mood", "mert"),
    mode: str = "auto",
    levels: Sequence[float] = DEFAULT_LEVELS,
    attributable_alpha: float = 0.05,
    budget: int = EXACT_BUDGET,
    traj: ShiftTrajectory | None = None,
) -> dict:
    """Full analysis of a two-sample dataset as a report document."""
    traj = traj if traj is not None else change_points(data)
    exact = _use_exact(traj.design, mode, budget)
    rank_mode = "exact" if exact else "asymptotic"
    doc: dict = {
        "summary": {
            "n": data.n,
            "m": data.m,
            "N": data.N,
            "quartile_positions": list(traj.design.q),
            "cell_totals": list(traj.design.k),
            "fivenum_x": list(fivenum(data.x)),
            "fivenum_y": list(fivenum(data.y)),
        },
        "methods": {},
    }
    for name in weights:
        w = resolve_weights(name)
        est = hl_estimate(traj, w)
        sets = [_set_doc(invert_rank_test(traj, w, 1 - lv, mode=rank_mode, budget=budget), rank_mode) for lv in levels]
        doc["methods"][w.name] = {
            "kind": "rank",
            "weights": list(w.w),
            "estimate": est.estimate,
            "defining_interval": list(est.defining_interval),
            "rule": est.rule,
            "confidence_sets": sets,
            "no_shift_test": _test_doc(deviate_test(traj, 0.0, w, rank_mode, budget)),
            "fit_test_at_estimate": _test_doc(fit_test(traj, est.estimate, rank_mode, budget)),
        }
    try:
        fit = gmm_estimate(traj)
    except UnboundedMinimizerError as exc:
        doc["methods"]["gmm"] = {"kind": "gmm", "error": str(exc)}
    else:
        sets = [_set_doc(gmm_confidence_set(traj, 1 - lv, fit), "asymptotic") for lv in levels]
        doc["methods"]["gmm"] = {
            "kind": "gmm",
            "estimate": fit.estimate.estimate,
            "defining_interval": list(fit.estimate.defining_interval),
            "rule": fit.estimate.rule,
            "min_g2": fit.min_g2,
            "minimizing_segments": [list(s) for s in fit.minimizing_segments],
            "ambiguity_flag": fit.ambiguity_flag,
            "overidentification_test": _test_doc(fit.overid),
            "confidence_sets": sets,
            "fit_test_at_estimate": _test_doc(fit_test(traj, fit.estimate.estimate, rank_mode, budget)),
        }
    try:
        ab = attributable_bound(data, attributable_alpha)
    except Exception as exc:  # budget refusal for huge samples
        doc["attributable"] = {"error": str(exc)}
    else:
        doc["attributable"] = asdict(ab)
        doc["attributable"]["alpha"] = attributable_alpha
        doc["attributable"]["note"] = "no sensitivity analysis for hidden bias is performed"
    doc["metadata"] = {
        "software": f"quartile-shift {__version__}",
        "kernel_backend": BACKEND,
        "tie_rule": TIE_RULE,
        "rank_mode": rank_mode,
        "gmm_mode": "asymptotic",
        "input_sha256": input_digest(data),
        "ties_in_data": data.has_ties(),
    }
    if data.has_ties():
        doc["metadata"]["ties_caveat"] = (
            "the data contain ties; exact null distributions assume continuous responses"
        )
    return doc


def pcurve_rows(traj: ShiftTrajectory, w="hl", mode: str = "exact"):
    lo, hi, pd, pg = segment_pvalues(traj, w, mode)
    return list(zip(lo.tolist(), hi.tolist(), pd.tolist(), pg.tolist()))


def gmm_curve_rows(traj: ShiftTrajectory):
    lo, hi, ex = g2_curve(traj)
    return list(zip(lo.tolist(), hi.tolist(), ex.tolist()))


def boxplot_rows(data: TwoSample, report: dict):
    rows = [("x",) + fivenum(data.x)]
    for name in ("hl", "gmm"):
        m = report["methods"].get(name)
        if m and "estimate" in m:
            rows.append((f"y-{name}",) + fivenum(data.y - m["estimate"]))
    return rows


# ---------------------------------------------------------------- text


def g6(v) -> str:
    if v is None:
        return "-"
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.6g}"


def p4(v) -> str:
    return "-" if v is None else f"{float(v):.4f}"


def _fmt_set(s: dict) -> str:
    ivs = " U ".join(f"[{g6(a)}, {g6(b)}]" for a, b in s["intervals"]) or "empty"
    lvl = f"{100 * s['nominal_level']:.1f}%"
    if s["attained_level"] is not None:
        lvl += f" (attained {100 * s['attained_level']:.2f}%)"
    return f"{lvl}: {ivs}"


def render_text(doc: dict) -> str:
    s = doc["summary"]
    lines = [
        f"n = {s['n']} treated, m = {s['m']} controls; quartile cells {s['cell_totals']}",
        "fivenum x: " + ", ".join(g6(v) for v in s["fivenum_x"]),
        "fivenum y: " + ", ".join(g6(v) for v in s["fivenum_y"]),
        "",
    ]
    for name, m in doc["methods"].items():
        if "error" in m:
            lines += [f"[{name}] {m['error']}", ""]
            continue
        a, b = m["defining_interval"]
        where = "where T crosses its null mean" if m["rule"] == "crossing-point" else f"midpoint of [{g6(a)}, {g6(b)})"
        lines.append(f"[{name}] estimate {g6(m['estimate'])} ({where})")
        if m["kind"] == "gmm":
            t = m["overidentification_test"]
            lines.append(f"  min G2 {g6(m['min_g2'])}, chi2(2) p = {p4(t['asymptotic_p'])}"
                         + ("  [several minimizing runs]" if m["ambiguity_flag"] else ""))
        else:
            t = m["no_shift_test"]
            lines.append(f"  test of no shift: D2 = {g6(t['statistic'])}, p = {p4(t['exact_p'] if t['exact_p'] is not None else t['asymptotic_p'])} ({t['mode']})")
        f = m["fit_test_at_estimate"]
        lines.append(f"  fit at estimate: G2 = {g6(f['statistic'])}, p = {p4(f['exact_p'] if f['exact_p'] is not None else f['asymptotic_p'])} ({f['mode']})")
        for cs in m["confidence_sets"]:
            lines.append("  " + _fmt_set(cs))
        lines.append("")
    ab = doc["attributable"]
    if "error" in ab:
        lines.append(f"[attributable] {ab['error']}")
    else:
        lines.append(
            f"[attributable] V = {ab['v_observed']} of {ab['total_pairs']}; critical {ab['critical_value']}; "
            f"at least {ab['lower_bound']} comparisons caused by treatment with {100 * ab['attained_confidence']:.1f}% confidence"
        )
    md = doc["metadata"]
    lines += ["", f"{md['software']} ({md['kernel_backend']} kernels); rank mode {md['rank_mode']}; input sha256 {md['input_sha256'][:16]}"]
    lines.append(f"tie rule: {md['tie_rule']}")
    if "ties_caveat" in md:
        lines.append(f"caveat: {md['ties_caveat']}")
    return "\n".join(lines) + "\n"
