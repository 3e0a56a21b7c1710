"""Closed-form parameter bounds: sampling density, deletion rate and tau windows."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ParameterError

INSERTION_ONLY = "insertion_only"
COMBINED = "combined"

# The insertion-only upper bound is implemented as 6 + 1/ln n + 12c (the form of
# the good-edge retention bound it comes from).
UPPER_BOUND_NOTE = "insertion-only tau upper bound uses 6 + 1/ln(n) + 12c"


@dataclass(frozen=True)
class RegimeParams:
    n: int
    s: float
    L: float
    c: float
    p: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if int(self.n) < 3:
            raise ParameterError("n must be >= 3")
        if not 0.0 < self.s <= 1.0:
            raise ParameterError("s must lie in (0, 1]")
        if not self.L >= 1.0:
            raise ParameterError("L must be >= 1")
        if not self.c > 0.0:
            raise ParameterError("c must be > 0")
        if not 0.0 <= self.p <= 1.0 or not 0.0 <= self.q <= 1.0:
            raise ParameterError("p and q must lie in [0, 1]")

    @property
    def c_consistent(self) -> bool:
        return self.q <= self.c * self.s


@dataclass(frozen=True)
class ParamWindow:
    lower: float
    upper: float
    mode: str
    warnings: tuple = ()

    @property
    def nonempty(self) -> bool:
        return self.lower < self.upper


def assumption_r_threshold(n: int) -> float:
    """Smallest admissible ball mass: 12 ln n / (n - 2)."""
    if int(n) < 3:
        raise ParameterError("n must be >= 3")
    return 12.0 * math.log(n) / (n - 2)


def deletion_p_bound(n: int, s: float) -> float:
    """Deletion rate below which the observed metric stays a 2-approximation: ½ exp(-9 ln n / (s (n-1)))."""
    if int(n) < 3:
        raise ParameterError("n must be >= 3")
    if not 0.0 < s <= 1.0:
        raise ParameterError("s must lie in (0, 1]")
    return 0.5 * math.exp(-9.0 * math.log(n) / (s * (n - 1)))


def tau_window(params: RegimeParams, mode: str = INSERTION_ONLY) -> ParamWindow:
    n, s, L, c, p, q = params.n, params.s, params.L, params.c, params.p, params.q
    ln = math.log(n)
    noise = math.sqrt(ln / (s * (n - 2)))
    if mode == INSERTION_ONLY:
        upper = 1.0 / ((6.0 + 1.0 / ln + 12.0 * c) * L * L)
        lower = (c + 2.0) * q + 2.0 * (c + 2.0) * noise
        return ParamWindow(lower, upper, mode)
    if mode == COMBINED:
        if p >= 1.0:
            raise ParameterError("combined window is undefined at p = 1")
        notes = []
        if p > 0.25:
            notes.append(f"p={p} exceeds 1/4")
        if q > min(0.125, c * s):
            notes.append(f"q={q} exceeds min(1/8, c*s)={min(0.125, c * s):.6g}")
        for note in notes:
            warnings.warn(note, stacklevel=2)
        upper = (1.0 - p) ** 2 / ((10.0 + 5.0 / (3.0 * ln) + 20.0 * c) * L * L)
        lower = (c + 2.0) * q / (1.0 - p) + 2.0 * (c + 2.0) / (1.0 - p) * noise
        return ParamWindow(lower, upper, mode, tuple(notes))
    raise ParameterError(f"unknown window mode {mode!r}")


@dataclass(frozen=True)
class FeasibilityReport:
    params: RegimeParams
    assumption_r_threshold: float
    deletion_p_bound: float
    insertion_window: ParamWindow
    combined_window: ParamWindow | None
    flags: dict
    notes: tuple

    FIELDS = ("n", "s", "L", "c", "p", "q", "assumption_r_threshold", "deletion_p_bound",
              "ins_tau_lower", "ins_tau_upper", "comb_tau_lower", "comb_tau_upper",
              "s_times_n", "ln_n", "assumption_r", "deletion_ok", "c_consistent",
              "insertion_window_nonempty", "combined_window_nonempty")

    def record(self) -> dict:
        prm = self.params
        comb = self.combined_window
        rec = {"n": prm.n, "s": prm.s, "L": prm.L, "c": prm.c, "p": prm.p, "q": prm.q,
               "assumption_r_threshold": self.assumption_r_threshold,
               "deletion_p_bound": self.deletion_p_bound,
               "ins_tau_lower": self.insertion_window.lower, "ins_tau_upper": self.insertion_window.upper,
               "comb_tau_lower": comb.lower if comb else math.nan,
               "comb_tau_upper": comb.upper if comb else math.nan,
               "s_times_n": prm.s * prm.n, "ln_n": math.log(prm.n)}
        rec.update(self.flags)
        return rec

    @property
    def all_ok(self) -> bool:
        return all(self.flags.values())


def feasibility_report(params: RegimeParams) -> FeasibilityReport:
    thr = assumption_r_threshold(params.n)
    pb = deletion_p_bound(params.n, params.s)
    ins = tau_window(params, INSERTION_ONLY)
    comb = None
    notes = [UPPER_BOUND_NOTE]
    if params.p < 1.0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            comb = tau_window(params, COMBINED)
        notes.extend(comb.warnings)
    flags = {
        "assumption_r": params.s >= thr,
        "deletion_ok": params.p < pb,
        "c_consistent": params.c_consistent,
        "insertion_window_nonempty": ins.nonempty,
        "combined_window_nonempty": bool(comb and comb.nonempty),
    }
    return FeasibilityReport(params, thr, pb, ins, comb, flags, tuple(notes))


def format_report(report: FeasibilityReport, fmt: str = "text") -> str:
    rec = report.record()
    if fmt == "csv":
        keys = FeasibilityReport.FIELDS
        return ",".join(keys) + "\n" + ",".join(_fmt(rec[k]) for k in keys) + "\n"
    if fmt != "text":
        raise ParameterError(f"unknown format {fmt!r}")
    width = max(map(len, FeasibilityReport.FIELDS))
    lines = [f"{k:<{width}}  {_fmt(rec[k])}" for k in FeasibilityReport.FIELDS]
    lines += [f"note: {note}" for note in report.notes]
    return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)
