"""Command-line driver producing deterministic CSV data files.

Each subcommand writes one CSV whose first line names the columns and
whose second line is a ``#`` comment recording the full parameter set,
seed and code version, so identical configurations reproduce identical
bytes. Floats are written in scientific notation with 12 significant
digits. The environment variable HUBENT_WORKERS controls the worker
count for ensembles (0 = all cores); results do not depend on it.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 capacity exceeded.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, ed, entropy, fvc, scf
from .chains import ChainSpec, Superlattice, build_potential
from .errors import (CapacityError, HubentError, InvalidSpecError,
                     NumericalFailureError)


def _fmt(x) -> str:
    return f"{float(x):.11e}"


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_patterns(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        x, y = tok.split(":")
        out.append((int(x), int(y)))
    return out


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0 or hi < lo:
        raise InvalidSpecError(f"bad grid {lo}..{hi} step {step}")
    count = int(round((hi - lo) / step))
    grid = lo + step * np.arange(count + 1)
    return grid[grid <= hi + 1e-12]


def _write_csv(path: str, columns: list[str], comment: str, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        fh.write(f"# {comment} version={__version__}\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    print(f"wrote {path}")


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_fig2(args) -> None:
    u_list = args.u_list
    n_grid = _grid(args.n_min, args.n_max, args.n_step)
    rows = []
    for u in u_list:
        for n in n_grid:
            s, lin = fvc.homogeneous_entropies(n, u)
            rows.append([_fmt(n), _fmt(u), _fmt(s), _fmt(lin)])
    comment = (f"command=fig2 u_list={u_list} n_min={args.n_min} "
               f"n_max={args.n_max} n_step={args.n_step}")
    _write_csv(_out_path(args, "fig2.csv"), ["n", "U", "S", "L"], comment, rows)


def cmd_fig3(args) -> None:
    u_grid = _grid(args.u_min, args.u_max, args.u_step)
    rows = []
    for n in args.n_list:
        pairs = int(round(n * args.ed_length / 2.0))
        commensurate = abs(pairs * 2.0 / args.ed_length - n) < 1e-9 and pairs >= 1
        if not commensurate:
            print(f"note: n={n} not realizable at L={args.ed_length}; "
                  "ED columns left empty", file=sys.stderr)
        for u in u_grid:
            s, lin = fvc.homogeneous_entropies(n, u)
            if commensurate:
                spec = ChainSpec(args.ed_length, pairs, pairs, u)
                s_ed, l_ed = ed.site_entropy_average(spec)
                rows.append([_fmt(n), _fmt(u), _fmt(s), _fmt(lin),
                             _fmt(s_ed), _fmt(l_ed)])
            else:
                rows.append([_fmt(n), _fmt(u), _fmt(s), _fmt(lin), "", ""])
    comment = (f"command=fig3 n_list={args.n_list} u_grid={args.u_min}..{args.u_max}"
               f"step{args.u_step} ed_length={args.ed_length}")
    _write_csv(_out_path(args, "fig3.csv"),
               ["n", "U", "S_fvc", "L_fvc", "S_ed", "L_ed"], comment, rows)


def cmd_fig4(args) -> None:
    n_grid = _grid(args.n_min, args.n_max, args.n_step)
    rows = []
    for u in args.u_list:
        for n in n_grid:
            rows.append([_fmt(n), _fmt(u), _fmt(fvc.double_occupancy(n, u))])
    comment = (f"command=fig4 u_list={args.u_list} n_min={args.n_min} "
               f"n_max={args.n_max} n_step={args.n_step}")
    _write_csv(_out_path(args, "fig4.csv"), ["n", "U", "w2"], comment, rows)


def cmd_fig5(args) -> None:
    u_grid = _grid(args.u_min, args.u_max, args.u_step)
    rows = []
    for n in args.n_list:
        probs = [entropy.probs_from_density(n, fvc.double_occupancy(n, u))
                 for u in u_grid]
        for order in args.orders:
            for u, p in zip(u_grid, probs):
                rows.append([_fmt(n), _fmt(u), str(order),
                             _fmt(entropy.taylor_entropy(p, order))])
        minimal = entropy.minimal_monotone_order(n, u_grid)
        # summary row: empty U and S_l fields mark it as the minimal order
        rows.append([_fmt(n), "", str(minimal), ""])
    comment = (f"command=fig5 n_list={args.n_list} u_grid={args.u_min}.."
               f"{args.u_max}step{args.u_step} orders={args.orders}")
    _write_csv(_out_path(args, "fig5.csv"), ["n", "U", "l", "S_l"], comment, rows)


def cmd_fig6(args) -> None:
    u_grid = _grid(args.u_min, args.u_max, args.u_step)
    cfg = scf.ScfConfig()
    rows = []
    for v in args.v_list:
        for n in args.n_list:
            n_total = int(round(n * args.length))
            if n_total % 2:
                raise InvalidSpecError(
                    f"n={n} gives odd particle number at L={args.length}"
                )
            s_mean, s_std, l_mean, l_std = scf.disorder_ensemble_scan(
                args.length, n_total, u_grid, args.concentration, v,
                args.samples, args.master_seed, cfg
            )
            for k, u in enumerate(u_grid):
                rows.append([_fmt(n), _fmt(u), _fmt(v), _fmt(s_mean[k]),
                             _fmt(s_std[k]), _fmt(l_mean[k]), _fmt(l_std[k])])
    comment = (f"command=fig6 n_list={args.n_list} u_grid={args.u_min}.."
               f"{args.u_max}step{args.u_step} C={args.concentration} "
               f"v_list={args.v_list} L={args.length} samples={args.samples} "
               f"master_seed={args.master_seed}")
    _write_csv(_out_path(args, "fig6.csv"),
               ["n", "U", "V", "S_mean", "S_std", "L_mean", "L_std"],
               comment, rows)


def cmd_superlattice(args) -> None:
    u_grid = _grid(args.u_min, args.u_max, args.u_step)
    rows = []
    pairs = args.n_total // 2
    if args.n_total % 2:
        raise InvalidSpecError("n-total must be even (spin balanced)")
    for x, y in args.patterns:
        for v in args.v_list:
            potential = build_potential(Superlattice(x, y, v), args.length)
            for u in u_grid:
                spec = ChainSpec(args.length, pairs, pairs, u, potential)
                if args.backend == "ed":
                    basis = ed.basis_for(spec)
                    if basis.dimension > ed.DEFAULT_DIMENSION_CAP:
                        raise CapacityError(
                            f"basis dimension {basis.dimension} exceeds the ED cap; "
                            "use --backend lda", dimension=basis.dimension
                        )
                    s, lin = ed.site_entropy_average(spec)
                else:
                    profile = scf.solve_scf_robust(spec)
                    report = scf.lda_entropies(profile, u)
                    s, lin = report.s_avg, report.l_avg
                rows.append([str(x), str(y), _fmt(v), _fmt(u), _fmt(s),
                             _fmt(lin), args.backend])
    comment = (f"command=superlattice patterns={args.patterns} v_list={args.v_list} "
               f"L={args.length} n_total={args.n_total} u_grid={args.u_min}.."
               f"{args.u_max}step{args.u_step} backend={args.backend}")
    _write_csv(_out_path(args, "superlattice.csv"),
               ["X", "Y", "V", "U", "S", "L", "backend"], comment, rows)


def cmd_eval(args) -> None:
    s, lin = fvc.homogeneous_entropies(args.n, args.u)
    w2 = fvc.double_occupancy(min(args.n, 2.0 - args.n) if args.n > 1 else args.n, args.u)
    print("n,U,S,L,w2")
    print(",".join([_fmt(args.n), _fmt(args.u), _fmt(s), _fmt(lin), _fmt(w2)]))


def cmd_ed(args) -> None:
    potential = np.array(args.potential) if args.potential else None
    spec = ChainSpec(args.length, args.n_up, args.n_down, args.u, potential)
    basis = ed.basis_for(spec)
    gs = ed.ground_state(spec, method=args.method)
    print(f"E0,{_fmt(gs.energy)}")
    print("site,n,w_up,w_down,w2,w_empty,S,L")
    profile = ed.density_profile(gs, basis)
    for site in range(spec.length):
        p = ed.site_probabilities(gs, basis, site)
        print(",".join([str(site + 1), _fmt(profile[site]), _fmt(p.up),
                        _fmt(p.down), _fmt(p.double), _fmt(p.empty),
                        _fmt(entropy.von_neumann(p)), _fmt(entropy.linear(p))]))


def _add_grid_options(sub, u_min=0.2, u_max=10.0, u_step=0.2):
    sub.add_argument("--u-min", type=float, default=u_min)
    sub.add_argument("--u-max", type=float, default=u_max)
    sub.add_argument("--u-step", type=float, default=u_step)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hubent",
        description="Entanglement entropies of Hubbard chains (CSV outputs)",
    )
    parser.add_argument("--config", help="JSON file with per-command defaults")
    parser.add_argument("--out", default=".", help="output directory")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("fig2", help="S(n) and L(n) for several U")
    s.add_argument("--u-list", type=_parse_floats, default=[0.2, 1.0, 4.0, 8.0])
    s.add_argument("--n-min", type=float, default=0.02)
    s.add_argument("--n-max", type=float, default=1.0)
    s.add_argument("--n-step", type=float, default=0.02)
    s.set_defaults(func=cmd_fig2)

    s = subs.add_parser("fig3", help="S(U), L(U) with ED overlay")
    s.add_argument("--n-list", type=_parse_floats, default=[0.25, 0.5, 1.0])
    _add_grid_options(s)
    s.add_argument("--ed-length", type=int, default=8)
    s.set_defaults(func=cmd_fig3)

    s = subs.add_parser("fig4", help="double occupancy w2(n) for several U")
    s.add_argument("--u-list", type=_parse_floats, default=[0.2, 1.0, 2.0, 4.0, 6.0, 8.0])
    s.add_argument("--n-min", type=float, default=0.02)
    s.add_argument("--n-max", type=float, default=1.0)
    s.add_argument("--n-step", type=float, default=0.02)
    s.set_defaults(func=cmd_fig4)

    s = subs.add_parser("fig5", help="truncated entropy expansions S_l(U)")
    s.add_argument("--n-list", type=_parse_floats, default=[0.5, 0.2])
    _add_grid_options(s)
    s.add_argument("--orders", type=_parse_ints, default=[1, 2, 4, 6, 10, 15, 25])
    s.set_defaults(func=cmd_fig5)

    s = subs.add_parser("fig6", help="disorder-averaged entropies")
    s.add_argument("--n-list", type=_parse_floats, default=[0.4, 0.6, 0.8])
    _add_grid_options(s)
    s.add_argument("--concentration", type=float, default=0.4)
    s.add_argument("--v-list", type=_parse_floats, default=[-1.0, -3.0])
    s.add_argument("--length", type=int, default=100)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--master-seed", type=int, default=20240101)
    s.set_defaults(func=cmd_fig6)

    s = subs.add_parser("superlattice", help="superlattice entropies")
    s.add_argument("--patterns", type=_parse_patterns, default=[(2, 7), (3, 6), (4, 5)])
    s.add_argument("--v-list", type=_parse_floats, default=[1.0, 2.0, 4.0])
    s.add_argument("--length", type=int, default=12)
    s.add_argument("--n-total", type=int, default=6)
    _add_grid_options(s, u_step=1.0)
    s.add_argument("--backend", choices=["ed", "lda"], default="lda")
    s.set_defaults(func=cmd_superlattice)

    s = subs.add_parser("eval", help="one-shot homogeneous evaluation")
    s.add_argument("--n", type=float, required=True)
    s.add_argument("--u", type=float, required=True)
    s.set_defaults(func=cmd_eval)

    s = subs.add_parser("ed", help="one-shot exact diagonalization")
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--n-up", type=int, required=True)
    s.add_argument("--n-down", type=int, required=True)
    s.add_argument("--u", type=float, default=0.0)
    s.add_argument("--potential", type=_parse_floats, default=None)
    s.add_argument("--method", choices=["lanczos", "dense"], default="lanczos")
    s.set_defaults(func=cmd_ed)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse argv with JSON config values as per-command defaults."""
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        try:
            with open(pre.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidSpecError(f"cannot read config {pre.config}: {exc}") from exc
        section = data.get(pre.command, {})
        merged = {**{k: v for k, v in data.items() if not isinstance(v, dict)},
                  **section}
        known = {action.dest for action in parser._actions}
        for sub_action in parser._subparsers._group_actions:
            sub = sub_action.choices.get(pre.command)
            if sub is not None:
                known |= {action.dest for action in sub._actions}
                for key, value in merged.items():
                    dest = key.replace("-", "_")
                    if dest not in known:
                        raise InvalidSpecError(f"unknown config key {key!r}")
                    for action in sub._actions + parser._actions:
                        if action.dest == dest:
                            if action.type is not None and isinstance(value, str):
                                value = action.type(value)
                            action.default = value
                            break
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except InvalidSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except HubentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
