"""Solving the identification system and selecting active terms.

The core selection criterion scores each candidate column by how much the
least-squares solution moves when that column is deleted: deleting an
irrelevant column barely changes the fit, deleting a true term changes it a
lot.  The per-column scores are normalized to Candidate Support Rates Q that
sum to one.  Baselines: sequential smallest-coefficient deletion (STLM) and
sequential-threshold ridge regression.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .candlib import LibrarySpec, evaluate_library
from .deriv import DiffConfig
from .field import Field
from .freqsys import (
    CutoffSpec,
    FreqSystem,
    RealSystem,
    assemble_freq_system,
    assemble_timespace_system,
    lowpass_filter,
)


class PipelineError(RuntimeError):
    """Failure inside the identification pipeline, tagged with its stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class Coefficients:
    values: np.ndarray  # physical scale
    residual: float
    condition: float


@dataclass(frozen=True)
class SupportRates:
    q: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class SelectionPolicy:
    mode: str = "gap"  # gap | fixed_k | threshold
    k: Optional[int] = None
    min_q: Optional[float] = None

    def __post_init__(self):
        if self.mode == "gap":
            if self.k is not None or self.min_q is not None:
                raise ValueError("gap mode takes no k/min_q")
        elif self.mode == "fixed_k":
            if self.k is None or self.k < 1 or self.min_q is not None:
                raise ValueError("fixed_k mode needs k >= 1 only")
        elif self.mode == "threshold":
            if self.min_q is None or self.k is not None:
                raise ValueError("threshold mode needs min_q only")
        else:
            raise ValueError(f"unknown selection mode {self.mode!r}")


def _stack_real(matrix: np.ndarray, rhs: np.ndarray):
    """Complex m x n system -> real 2m x n system (coefficients stay real)."""
    if np.iscomplexobj(matrix) or np.iscomplexobj(rhs):
        a = np.vstack([matrix.real, matrix.imag])
        b = np.concatenate([np.asarray(rhs).real, np.asarray(rhs).imag])
        return a, b
    return np.asarray(matrix, dtype=float), np.asarray(rhs, dtype=float)


def _solve(matrix: np.ndarray, rhs: np.ndarray):
    """Minimum-norm real least squares via SVD, rcond 1e-12."""
    a, b = _stack_real(matrix, rhs)
    if not np.any(a):
        raise PipelineError("lstsq", "degenerate all-zero system matrix")
    x, _, _, sv = np.linalg.lstsq(a, b, rcond=1e-12)
    resid = float(np.linalg.norm(a @ x - b))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    return x, resid, cond


def lstsq(system: FreqSystem | RealSystem) -> Coefficients:
    """Least-squares solution of the full system, on physical scale."""
    x, resid, cond = _solve(system.matrix, system.rhs)
    return Coefficients(
        values=x / system.column_norms, residual=resid, condition=cond
    )


def support_rates(system: FreqSystem | RealSystem) -> SupportRates:
    """Candidate Support Rate of every column.

    q_i is the total absolute change of the (unit-column-scale) least-squares
    solution over the surviving coefficients when column i is deleted; Q is q
    normalized to sum to one.  Scale-invariant: columns are re-normalized to
    unit 2-norm before solving.
    """
    a, b = _stack_real(system.matrix, system.rhs)
    n = a.shape[1]
    if a.shape[0] < n:
        raise PipelineError("support_rates", "system has fewer rows than columns")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise PipelineError("support_rates", "all-zero column in system")
    a = a / norms
    xi0, _, _, _ = np.linalg.lstsq(a, b, rcond=1e-12)
    q = np.empty(n)
    for i in range(n):
        keep = np.arange(n) != i
        xi_i, _, _, _ = np.linalg.lstsq(a[:, keep], b, rcond=1e-12)
        q[i] = np.abs(xi0[keep] - xi_i).sum()
    total = q.sum()
    if total == 0.0:
        return SupportRates(q=np.full(n, 1.0 / n), degenerate=True)
    return SupportRates(q=q / total)


def select_terms(
    rates: SupportRates,
    policy: SelectionPolicy,
    system: FreqSystem | RealSystem | None = None,
) -> list[int]:
    """Pick active columns from the support rates under the given policy.

    Returned indices are in library order.  Ties are broken toward the
    earlier library column.  In gap mode, when the system is available, the
    fit residuals of the ranked prefixes temper the rate gaps two ways: a
    prefix is skipped when adding the next-ranked column halves the residual
    (it is missing real structure — noise columns never buy that much), and
    each surviving rank's gap ratio is weighted by the residual gain of its
    own last column, capped at 2, so ranks that end on a column which buys
    nothing cannot win on a slightly larger gap alone.
    """
    q = rates.q
    n = len(q)
    order = np.argsort(-q, kind="stable")  # stable: earlier index wins ties
    if policy.mode == "fixed_k":
        k = min(policy.k, n)
        return sorted(order[:k].tolist())
    if policy.mode == "threshold":
        chosen = [i for i in range(n) if q[i] >= policy.min_q]
        if not chosen:
            raise PipelineError("select_terms", "threshold selected no terms")
        return chosen
    # gap mode
    if rates.degenerate:
        raise PipelineError("select_terms", "degenerate uniform Q: no gap exists")
    r_max = min(n - 1, 8)
    underfit = [False] * (r_max + 1)
    gain_weight = [1.0] * (r_max + 1)
    if system is not None:
        a, b = _stack_real(system.matrix, system.rhs)
        scale = np.linalg.norm(b)
        rho = [scale] + [_prefix_residual(a, b, order[:r].tolist())
                         for r in range(1, r_max + 2)]
        for r in range(1, r_max + 1):
            gain_next = rho[r] / (rho[r + 1] + 1e-12 * scale)
            underfit[r] = gain_next >= 2.0
            gain_own = rho[r - 1] / (rho[r] + 1e-12 * scale)
            gain_weight[r] = min(gain_own, 2.0)
    qs = q[order]
    best_r, best_score = None, -np.inf
    for r in range(1, r_max + 1):
        if underfit[r]:
            continue
        hi, lo = qs[r - 1], qs[r]
        ratio = np.inf if lo == 0.0 else hi / lo
        score = ratio * gain_weight[r]
        if score > best_score:
            best_score, best_r = score, r
    if best_r is None:  # every prefix underfits: fall back to the plain gap
        ratios = [np.inf if qs[r] == 0.0 else qs[r - 1] / qs[r]
                  for r in range(1, r_max + 1)]
        best_r = 1 + int(np.argmax(ratios))
    return sorted(order[:best_r].tolist())


def _prefix_residual(a: np.ndarray, b: np.ndarray, indices: list[int]) -> float:
    x, _, _, _ = np.linalg.lstsq(a[:, indices], b, rcond=None)
    return float(np.linalg.norm(a[:, indices] @ x - b))


def fit_selected(system: FreqSystem | RealSystem, indices) -> Coefficients:
    """Least-squares refit on the selected columns, physical scale."""
    indices = list(indices)
    if not indices:
        raise PipelineError("fit_selected", "empty selection")
    x, resid, cond = _solve(system.matrix[:, indices], system.rhs)
    return Coefficients(
        values=x / system.column_norms[np.asarray(indices)],
        residual=resid,
        condition=cond,
    )


@dataclass(frozen=True)
class IdentResult:
    selected: tuple[str, ...]
    coefficients: Coefficients
    rates: SupportRates | None
    column_names: tuple[str, ...]
    method: str
    config: dict = dc_field(default_factory=dict)
    converged: bool = True

    @property
    def selected_map(self) -> dict[str, float]:
        return dict(zip(self.selected, self.coefficients.values.tolist()))

    def equation_string(self, lhs: str = "u_t") -> str:
        parts = []
        for name, c in zip(self.selected, self.coefficients.values):
            sign = "-" if c < 0 else "+"
            mag = f"{abs(c):.4f}*{name}"
            parts.append(f"{sign} {mag}" if parts else
                         (f"-{mag}" if c < 0 else mag))
        return f"{lhs} = " + " ".join(parts) if parts else f"{lhs} = 0"

    def to_json(self) -> str:
        rates = (
            {n: float(v) for n, v in zip(self.column_names, self.rates.q)}
            if self.rates is not None
            else None
        )
        lhs = "u_tt" if self.config.get("lhs_order") == 2 else "u_t"
        return json.dumps(
            {
                "method": self.method,
                "selected": [
                    {"term": n, "coefficient": float(c)}
                    for n, c in zip(self.selected, self.coefficients.values)
                ],
                "support_rates": rates,
                "residual": self.coefficients.residual,
                "condition": self.coefficients.condition,
                "config": self.config,
                "equation_string": self.equation_string(lhs),
            },
            indent=2,
        )


def _result(system, indices, rates, method, config, converged=True) -> IdentResult:
    coeffs = fit_selected(system, indices)
    return IdentResult(
        selected=tuple(system.column_names[i] for i in indices),
        coefficients=coeffs,
        rates=rates,
        column_names=tuple(system.column_names),
        method=method,
        config=config,
        converged=converged,
    )


def csr_identify(
    system: FreqSystem | RealSystem,
    policy: SelectionPolicy = SelectionPolicy(),
    config: dict | None = None,
) -> IdentResult:
    """Support-rate selection followed by a least-squares refit."""
    rates = support_rates(system)
    indices = select_terms(rates, policy, system=system)
    return _result(system, indices, rates, "csr", config or {})


def stlm(
    system: FreqSystem | RealSystem,
    final_k: int | None = None,
    threshold: float | None = None,
    config: dict | None = None,
) -> IdentResult:
    """Sequentially delete the smallest-coefficient column and re-solve.

    The plain least-squares solution of the *unscaled* system is used and
    coefficients are compared on the physical scale, so a term whose true
    coefficient is small competes directly with the noise-driven
    coefficients of irrelevant terms -- the known weakness of
    magnitude-based pruning.  Stops when final_k columns remain, or
    (threshold mode) when every surviving coefficient is >= threshold.
    """
    if (final_k is None) == (threshold is None):
        raise ValueError("give exactly one of final_k / threshold")
    norms = getattr(system, "column_norms", None)
    matrix = system.matrix if norms is None else system.matrix * norms
    a, b = _stack_real(matrix, system.rhs)
    active = list(range(a.shape[1]))
    while True:
        x, _, _, _ = np.linalg.lstsq(a[:, active], b, rcond=None)
        if final_k is not None:
            if len(active) <= final_k:
                break
        else:
            if np.all(np.abs(x) >= threshold) or len(active) == 1:
                break
        drop = int(np.argmin(np.abs(x)))
        active.pop(drop)
    return _result(system, sorted(active), None, "stlm", config or {})


def st_ridge(
    system: FreqSystem | RealSystem,
    lam: float = 1e-5,
    tol: float = 0.1,
    max_iter: int = 25,
    config: dict | None = None,
) -> IdentResult:
    """Sequential-threshold ridge baseline: solve, zero small, repeat."""
    a, b = _stack_real(system.matrix, system.rhs)
    norms = np.linalg.norm(a, axis=0)
    a = a / np.where(norms == 0, 1.0, norms)
    n = a.shape[1]

    def ridge(cols):
        m = a[:, cols]
        if lam == 0.0:
            x, _, _, _ = np.linalg.lstsq(m, b, rcond=1e-12)
            return x
        return np.linalg.solve(m.T @ m + lam * np.eye(len(cols)), m.T @ b)

    active = list(range(n))
    converged = False
    for _ in range(max_iter):
        x = ridge(active)
        keep = [c for c, v in zip(active, x) if abs(v) >= tol]
        if not keep:
            return IdentResult(
                selected=(),
                coefficients=Coefficients(np.empty(0), float("nan"), float("nan")),
                rates=None,
                column_names=tuple(system.column_names),
                method="st_ridge",
                config=config or {},
                converged=False,
            )
        if keep == active:
            converged = True
            break
        active = keep
    return _result(system, sorted(active), None, "st_ridge", config or {},
                   converged=converged)


@dataclass(frozen=True)
class PipelineConfig:
    library: LibrarySpec
    diff: DiffConfig
    cutoff: CutoffSpec
    selector: SelectionPolicy = SelectionPolicy()
    domain: str = "freq"  # freq | timespace | lowpass_then_timespace
    sample_stride: int = 1
    lowpass_cutoff: CutoffSpec | None = None  # cutoff used to filter u itself

    def __post_init__(self):
        if self.domain not in ("freq", "timespace", "lowpass_then_timespace"):
            raise ValueError(f"unknown domain {self.domain!r}")


def build_system(f: Field, cfg: PipelineConfig):
    """Evaluate the library on f and assemble the configured system."""
    try:
        source = f
        if cfg.domain == "lowpass_then_timespace":
            cut = cfg.lowpass_cutoff or cfg.cutoff
            source = lowpass_filter(f, cut)
    except Exception as exc:
        raise PipelineError("lowpass", str(exc)) from exc
    try:
        lib = evaluate_library(source, cfg.library, cfg.diff)
    except Exception as exc:
        raise PipelineError("evaluate_library", str(exc)) from exc
    try:
        if cfg.domain == "freq":
            return assemble_freq_system(lib, cfg.cutoff)
        return assemble_timespace_system(lib, cfg.sample_stride)
    except Exception as exc:
        raise PipelineError("assemble", str(exc)) from exc


def identify(f: Field, cfg: PipelineConfig, config_echo: dict | None = None) -> IdentResult:
    """End-to-end pipeline: library -> system -> selection -> refit."""
    system = build_system(f, cfg)
    echo = {"domain": cfg.domain, "selector": cfg.selector.mode,
            "lhs_order": cfg.library.lhs_order}
    if config_echo:
        echo.update(config_echo)
    try:
        return csr_identify(system, cfg.selector, config=echo)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("select_fit", str(exc)) from exc
