"""Evaluation of single links into flat records, and their CSV/JSON/table serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, fields

from . import continuous
from .config import CONTINUOUS, PointSpec
from .errors import DomainError, InfeasibleError
from .holevo import ChannelMatrices, compute_fiducial, gh_capacity
from .link import LinkPlan, SignalState, propagate_link, total_power
from .optimize import OptimizationProblem, feasibility_check, optimize
from .shannon import capacity_dual_quadrature, capacity_homodyne, snr

NAN = math.nan


@dataclass(frozen=True)
class SweepRecord:
    L: float
    alpha: float
    nbar: float
    R: int | str
    regime: str
    objective: str
    c_homodyne: float
    c_dual: float
    c_gh_coherent: float
    c_gh_optimal: float
    tau: float
    y: float
    omega: float
    feasibility_margin: float
    regime_branch: str
    c_asymptote: float = NAN
    t_eval_s: float = NAN

    def check(self, slack: float = 1e-9) -> None:
        """Raise if a capacity is negative or the capacity ordering is violated."""
        caps = (self.c_homodyne, self.c_dual, self.c_gh_coherent, self.c_gh_optimal)
        if any(c < 0 for c in caps if not math.isnan(c)):
            raise DomainError(f"negative capacity in {self}")
        if not math.isnan(self.c_gh_optimal):
            scale = max(1.0, self.c_gh_optimal)
            if self.c_gh_optimal < self.c_gh_coherent - slack * scale or \
                    self.c_gh_coherent < self.c_homodyne - slack * scale:
                raise DomainError(f"capacity ordering violated in {self}")


COLUMNS = [f.name for f in fields(SweepRecord)]
TIMING_COLUMNS = ("t_eval_s",)


def _plan_for(spec: PointSpec) -> tuple[LinkPlan, bool]:
    """Build the discrete plan of a point; the flag is True when power feasibility must hold."""
    if spec.plan_positions is not None:
        plan = LinkPlan(spec.alpha, spec.length, spec.plan_positions, spec.plan_gains)
        return plan, spec.regime == "power"
    if spec.count == 0:
        return LinkPlan(spec.alpha, spec.length), False
    res = optimize(OptimizationProblem(spec.alpha, spec.length, spec.count, spec.nbar, spec.regime,
                                       spec.objective, spec.positions))
    return res.plan, spec.regime == "power"


def _continuous_outputs(spec: PointSpec):
    """Output states for Q-only and split coherent input, without forming the channel.

    Both inputs carry vacuum noise, so they share the output noise and differ
    only in how the signal scales; underflowing gains simply give zero signal.
    """
    out_q = continuous.output_state(spec.regime, spec.alpha, spec.length, spec.nbar)
    lq, li = continuous.log_power_gains(spec.regime, spec.alpha, spec.length, spec.nbar)
    out_split = SignalState(spec.nbar * math.exp(lq), spec.nbar * math.exp(li), out_q.n_q, out_q.n_i)
    return out_q, out_split


def _asymptote(spec: PointSpec) -> float:
    if not spec.asymptotes or spec.count != CONTINUOUS or spec.nbar == 0.0:
        return NAN
    if spec.regime == "amplitude":
        return continuous.asymptotic_capacity_amplitude(spec.alpha, spec.length, spec.nbar)
    return continuous.asymptotic_capacity_power(spec.alpha, spec.length, spec.nbar)


def evaluate(spec: PointSpec) -> SweepRecord:
    """All capacities of one link for coherent input carrying ``nbar`` photons.

    Homodyne uses the whole budget on Q; the dual-quadrature figure splits it
    evenly between Q and I over the same link.
    """
    t0 = time.perf_counter()
    q_in = SignalState.coherent_q(spec.nbar)
    split_in = SignalState.coherent_split(spec.nbar)
    continuous_link = spec.count == CONTINUOUS and not (spec.regime == "power" and spec.nbar == 0.0)
    if continuous_link:
        out_q, out_split = _continuous_outputs(spec)
        # for both profiles the largest total power sits at the output
        margin = 2.0 * spec.nbar + 1.0 - total_power(out_q)
        plan = None
    else:
        # an empty budget admits only unit gain, so a power-restored link is pure loss
        plan, needs_power = _plan_for(spec) if spec.count != CONTINUOUS else (LinkPlan(spec.alpha, spec.length), False)
        out_q = propagate_link(plan, q_in)
        out_split = propagate_link(plan, split_in)
        margin = feasibility_check(plan, q_in)
        if needs_power and margin < -1e-9 * (2.0 * spec.nbar + 1.0):
            raise InfeasibleError(f"plan exceeds the power budget by {-margin:.6g} photons", margin)
    c_hom = capacity_homodyne(out_q.s_q / out_q.n_q)
    c_dual = capacity_dual_quadrature(snr(out_split))

    c_coh = c_opt = tau = y = omega = NAN
    branch = "skipped"
    if spec.gh:
        try:
            if plan is None:
                ch = continuous.continuous_channel(spec.regime, spec.alpha, spec.length, spec.nbar)
            else:
                ch = ChannelMatrices.from_link(plan)
            fid = compute_fiducial(ch)
            tau, y, omega = fid.tau, fid.y, fid.omega
            c_coh = gh_capacity(ch, spec.nbar, "coherent").capacity
            opt = gh_capacity(ch, spec.nbar, "optimal")
            c_opt, branch = opt.capacity, opt.regime
        except (DomainError, OverflowError) as exc:
            warnings.warn(f"Gordon-Holevo columns left empty at L={spec.length}: {exc}", RuntimeWarning,
                          stacklevel=2)
            branch = "out-of-range"
    r_field = CONTINUOUS if spec.count == CONTINUOUS else plan.amp_count
    rec = SweepRecord(spec.length, spec.alpha, spec.nbar, r_field, spec.regime_label, spec.objective,
                      c_hom, c_dual, c_coh, c_opt, tau, y, omega, margin, branch, _asymptote(spec),
                      time.perf_counter() - t0)
    rec.check()
    return rec


def _format_float(v: float) -> str:
    """17 significant digits, enough for an exact round trip of any double."""
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _cell(v) -> str:
    return _format_float(v) if isinstance(v, float) else str(v)


def columns(timings: bool = False) -> list[str]:
    return [c for c in COLUMNS if timings or c not in TIMING_COLUMNS]


def write_csv(stream, records, metadata: list[str] | None = None, timings: bool = False) -> None:
    for line in metadata or ():
        stream.write(f"# {line}\n")
    cols = columns(timings)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(cols)
    for rec in records:
        d = asdict(rec)
        w.writerow([_cell(d[c]) for c in cols])


def read_csv(text: str) -> list[dict]:
    """Parse CSV written by ``write_csv``; numeric fields come back as floats."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = []
    for row in csv.DictReader(io.StringIO("\n".join(lines))):
        parsed = {}
        for k, v in row.items():
            if k in ("regime", "objective", "regime_branch"):
                parsed[k] = v
            elif k == "R":
                parsed[k] = v if v == CONTINUOUS else int(v)
            else:
                parsed[k] = float(v)
        rows.append(parsed)
    return rows


def record_json(rec: SweepRecord, timings: bool = False) -> dict:
    d = asdict(rec)
    out = {}
    for c in columns(timings):
        v = d[c]
        # JSON has no NaN; empty values become null
        out[c] = None if isinstance(v, float) and math.isnan(v) else v
    return out


def write_json(stream, records, metadata: dict | None = None, timings: bool = False, single=False) -> None:
    body = [record_json(r, timings) for r in records]
    doc: dict = {"record": body[0]} if single else {"records": body}
    if metadata:
        doc["metadata"] = metadata
    json.dump(doc, stream, indent=2)
    stream.write("\n")


def write_table(stream, records, timings: bool = False) -> None:
    cols = columns(timings)
    rows = [[_short(asdict(r)[c]) for c in cols] for r in records]
    widths = [max([len(c)] + [len(row[i]) for row in rows]) for i, c in enumerate(cols)]
    stream.write("  ".join(c.rjust(w) for c, w in zip(cols, widths)) + "\n")
    for row in rows:
        stream.write("  ".join(v.rjust(w) for v, w in zip(row, widths)) + "\n")


def _short(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)
