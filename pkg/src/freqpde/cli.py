"""Command-line interface.

Subcommands: synth, noise, identify, sweep, compare, csr-vs-stlm.
Exit codes: 0 success, 1 usage error, 2 numerical/pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .candlib import LibrarySpec, parse_term, standard_library
from .deriv import DiffConfig
from .field import FieldError, read_field, read_sidecar, write_field
from .freqsys import CutoffSpec
from .ident import PipelineConfig, PipelineError, SelectionPolicy, identify
from .synth import (
    DEFAULT_GRIDS,
    EQUATIONS,
    GridSpec,
    NoiseSpec,
    UnstableConfigError,
    inject_noise,
    solve_reference,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _add_diff_flags(p):
    p.add_argument("--diff", choices=["fd", "poly"], default=None,
                   help="differentiation method (default: fd, or poly for noisy 1-D)")
    p.add_argument("--fd-order", type=int, default=2,
                   help="finite-difference order of accuracy (default 2)")
    p.add_argument("--poly-degree", type=int, default=6,
                   help="local polynomial degree (default 6)")
    p.add_argument("--poly-window", type=int, default=21,
                   help="local polynomial window length (default 21)")
    p.add_argument("--stride", type=int, default=None,
                   help="stencil step stride (default 1; 2 for 3-D data)")


def _add_pipeline_flags(p):
    _add_diff_flags(p)
    p.add_argument("--library", choices=["1d", "2d", "3d"], default=None,
                   help="standard candidate library (default: match data dims)")
    p.add_argument("--library-json", type=Path, default=None,
                   help="custom library: JSON list of term descriptors")
    p.add_argument("--lhs-order", type=int, choices=[1, 2], default=1,
                   help="time-derivative order of the LHS (default 1)")
    p.add_argument("--cutoff", type=str, default=None,
                   help="retained modes per axis, e.g. 12,12 (defaults by dims)")
    p.add_argument("--method", choices=["csr", "stlm", "st_ridge"], default="csr",
                   help="term selection method (default csr)")
    p.add_argument("--selector", choices=["gap", "fixed_k", "threshold"],
                   default="gap", help="CSR selection policy (default gap)")
    p.add_argument("--k", type=int, default=None, help="term count for fixed_k")
    p.add_argument("--min-q", type=float, default=None,
                   help="Q threshold for threshold mode")
    p.add_argument("--domain", choices=["freq", "timespace",
                                        "lowpass_then_timespace"],
                   default="freq", help="system assembly domain (default freq)")
    p.add_argument("--no-normalize", action="store_true",
                   help="diagnostics only: skip unit-norm column scaling")


def build_parser() -> _Parser:
    p = _Parser(prog="freqpde",
                description="PDE discovery from noisy gridded data via "
                            "low-frequency spectral sparse regression")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON config file; flags override its entries")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("synth", help="solve a benchmark equation to a field bundle")
    s.add_argument("--equation", required=True, choices=sorted(EQUATIONS))
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--points", type=str, default=None,
                   help="per-axis point counts incl. time, e.g. 256,101")
    s.add_argument("--extents", type=str, default=None,
                   help="per-axis extents incl. time horizon, e.g. 16,10")
    s.add_argument("--substeps", type=int, default=None)

    n = sub.add_parser("noise", help="inject seeded Gaussian noise into a bundle")
    n.add_argument("--in", dest="inp", type=Path, required=True)
    n.add_argument("--out", type=Path, required=True)
    n.add_argument("--alpha", type=float, required=True)
    n.add_argument("--seed", type=int, default=0)

    i = sub.add_parser("identify", help="identify the PDE of a field bundle")
    i.add_argument("--in", dest="inp", type=Path, required=True)
    i.add_argument("--out", type=Path, default=None, help="result JSON path")
    _add_pipeline_flags(i)

    w = sub.add_parser("sweep", help="noise-level sweep over seeded trials")
    w.add_argument("--equation", required=True, choices=sorted(EQUATIONS))
    w.add_argument("--alphas", type=str, default="0,0.25,0.5,0.75,1.0,1.25,1.5,1.75,2.0")
    w.add_argument("--trials", type=int, default=10)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", type=Path, required=True, help="summary JSON path")
    w.add_argument("--csv", type=Path, default=None, help="per-trial CSV path")
    w.add_argument("--jsonl", type=Path, default=None, help="per-trial JSONL log")

    c = sub.add_parser("compare", help="fixed-structure method comparison")
    c.add_argument("--equation", required=True, choices=sorted(EQUATIONS))
    c.add_argument("--alphas", type=str, default="0.1,0.5,1.0")
    c.add_argument("--trials", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", type=Path, required=True, help="CSV path")

    v = sub.add_parser("csr-vs-stlm", help="selector robustness comparison")
    v.add_argument("--equation", required=True, choices=sorted(EQUATIONS))
    v.add_argument("--alphas", type=str,
                   default="0,0.05,0.1,0.15,0.2,0.3,0.5,1.0,1.5,2.0")
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", type=Path, required=True, help="summary JSON path")
    return p


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.split(","))


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.split(","))


def _pipeline_from_args(args, f) -> tuple[PipelineConfig, dict]:
    spatial = f.ndim - 1
    if args.library_json is not None:
        raw = json.loads(args.library_json.read_text())
        terms = [parse_term(d) for d in raw if not isinstance(d, str)]
        lib = LibrarySpec(tuple(terms), lhs_order=args.lhs_order)
    else:
        dims = int(args.library[0]) if args.library else spatial
        lib = standard_library(dims, lhs_order=args.lhs_order)

    if args.diff is None:
        # poly for noisy 1-D data (per sidecar alpha when available), else fd
        meta = getattr(args, "_sidecar", None)
        alpha = (meta or {}).get("noise", {}).get("alpha", 0.0)
        noisy = alpha > 0
        diff = bench.default_diff_config(spatial, noisy)
    else:
        method = "finite_difference" if args.diff == "fd" else "local_polynomial"
        diff = DiffConfig(
            method=method,
            fd_order_of_accuracy=args.fd_order,
            poly_degree=args.poly_degree,
            poly_window=args.poly_window,
            step_stride=args.stride or (2 if spatial == 3 else 1),
        )
    cutoff = (CutoffSpec(_ints(args.cutoff)) if args.cutoff
              else bench.default_cutoff(spatial))
    if args.method == "csr":
        selector = SelectionPolicy(mode=args.selector, k=args.k, min_q=args.min_q)
    else:  # --k means the STLM target count, not a CSR policy parameter
        selector = SelectionPolicy()
    cfg = PipelineConfig(library=lib, diff=diff, cutoff=cutoff,
                         selector=selector, domain=args.domain)
    echo = {
        "library": lib.names,
        "lhs_order": lib.lhs_order,
        "diff": vars(diff).copy() if hasattr(diff, "__dict__") else {
            "method": diff.method,
            "fd_order_of_accuracy": diff.fd_order_of_accuracy,
            "poly_degree": diff.poly_degree,
            "poly_window": diff.poly_window,
            "step_stride": diff.step_stride,
        },
        "cutoff": list(cutoff.ks),
        "selector": {"mode": selector.mode, "k": selector.k, "min_q": selector.min_q},
        "domain": args.domain,
        "method": args.method,
    }
    return cfg, echo


def _cmd_synth(args) -> int:
    eq = EQUATIONS[args.equation]
    grid = DEFAULT_GRIDS[args.equation]
    if args.points or args.extents or args.substeps:
        grid = GridSpec(
            extents=_floats(args.extents) if args.extents else grid.extents,
            points=_ints(args.points) if args.points else grid.points,
            substeps=args.substeps or grid.substeps,
            origins=grid.origins,
        )
    f = solve_reference(eq, grid)
    meta = {
        "equation": eq.name,
        "coefficients": eq.coefficients,
        "true_terms": [[t.name, c] for t, c in eq.true_terms],
        "lhs_order": eq.lhs_order,
        "grid": {"extents": list(grid.extents), "points": list(grid.points),
                 "substeps": grid.substeps,
                 "origins": list(grid.origins) if grid.origins else None},
        "noise": {"alpha": 0.0},
    }
    write_field(f, args.out, metadata=meta)
    print(f"wrote {args.out} dims={f.dims}")
    return 0


def _cmd_noise(args) -> int:
    f = read_field(args.inp)
    meta = read_sidecar(args.inp) or {}
    out = inject_noise(f, NoiseSpec(alpha=args.alpha, seed=args.seed))
    meta["noise"] = {"alpha": args.alpha, "seed": args.seed}
    write_field(out, args.out, metadata=meta)
    print(f"wrote {args.out} alpha={args.alpha} seed={args.seed}")
    return 0


def _cmd_identify(args) -> int:
    f = read_field(args.inp)
    args._sidecar = read_sidecar(args.inp)
    cfg, echo = _pipeline_from_args(args, f)
    if args.method == "csr":
        result = identify(f, cfg, config_echo=echo)
    else:
        from .ident import build_system, st_ridge, stlm

        system = build_system(f, cfg)
        if args.method == "stlm":
            result = stlm(system, final_k=args.k or 2, config=echo)
        else:
            result = st_ridge(system, config=echo)
    lhs = "u_tt" if cfg.library.lhs_order == 2 else "u_t"
    print(result.equation_string(lhs))
    if args.out:
        Path(args.out).write_text(result.to_json())
    return 0


def _cmd_sweep(args) -> int:
    eq = EQUATIONS[args.equation]
    report = bench.alpha_sweep(
        eq, _floats(args.alphas), trials=args.trials, base_seed=args.seed,
        jsonl_path=args.jsonl,
    )
    args.out.write_text(json.dumps(report.summary(), indent=2))
    if args.csv:
        bench.write_sweep_csv(report, args.csv)
    amax = report.alpha_max
    tag = " (exceeds grid)" if report.exceeds_grid else ""
    print(f"{eq.name}: alpha_max = {amax}{tag}")
    return 0


def _cmd_compare(args) -> int:
    eq = EQUATIONS[args.equation]
    cmp_ = bench.compare_methods(eq, _floats(args.alphas), trials=args.trials,
                                 base_seed=args.seed)
    cmp_.to_csv(args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_csr_vs_stlm(args) -> int:
    eq = EQUATIONS[args.equation]
    cmp_ = bench.csr_vs_stlm(eq, _floats(args.alphas), trials=args.trials,
                             base_seed=args.seed)
    args.out.write_text(json.dumps(cmp_.summary(), indent=2))
    print(f"csr alpha_max = {cmp_.csr_alpha_max}, "
          f"stlm alpha_max = {cmp_.stlm_alpha_max}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "noise": _cmd_noise,
    "identify": _cmd_identify,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "csr-vs-stlm": _cmd_csr_vs_stlm,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            defaults = json.loads(args.config.read_text())
            for k, v in defaults.items():
                if getattr(args, k, None) is None:
                    setattr(args, k, v)
        return _COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except (FieldError, PipelineError, UnstableConfigError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
