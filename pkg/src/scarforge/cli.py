"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical-guard violation
(norm drift, non-closed subset, no recurrence), 4 unknown model.  Thread
count comes from --threads or SCARFORGE_THREADS (the flag wins) and is
applied to the BLAS pool before numpy loads; it never changes results, only
timing.  All emitted files are deterministic for a fixed configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_UNKNOWN_MODEL = 4


def _apply_threads(argv) -> None:
    threads = os.environ.get("SCARFORGE_THREADS")
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            threads = argv[i + 1]
        elif arg.startswith("--threads="):
            threads = arg.split("=", 1)[1]
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


def _read_config_file(path) -> dict:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scarforge", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="BLAS/worker thread count")
    parser.add_argument("--config", default=None, help="key=value file of defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, length_default=12):
        p.add_argument("--model", required=True, help="registry name or model file")
        p.add_argument("-L", "--length", type=int, default=length_default)
        p.add_argument("--out", default=None)

    p = sub.add_parser("orbit", help="cycle of a seed state under the automaton")
    common(p)
    p.add_argument("--seed", default="neel", help="neel | polarized | an explicit 0/1 string")

    p = sub.add_parser("rules", help="commutation-rule report for a model")
    common(p)
    p.add_argument("--type", dest="kind", choices=("I", "II"), default=None)

    p = sub.add_parser("search", help="exhaustive gate search on the alternating orbit")
    p.add_argument("--orbit", choices=("neel",), default="neel")
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--trivial-last-qubit", action="store_true", default=True)
    p.add_argument("--require-cycle", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--top", type=int, default=None, help="emit only the best N gates")
    p.add_argument("--out", default=None)

    p = sub.add_parser("revivals", help="participation-ratio and fidelity trace")
    common(p)
    p.add_argument("--state", default="neel", help="neel | polarized | generic | 0/1 string")
    p.add_argument("--tmax", type=float, default=300.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--site", type=int, default=None, help="also trace <Z_site(t)>")
    p.add_argument("--window", type=float, default=0.4, help="microcanonical energy window")
    p.add_argument("--svg", default=None)

    p = sub.add_parser("ipr", help="IPR versus energy scatter with scar flags")
    common(p)
    p.add_argument(
        "--subspace",
        choices=("working", "krylov", "full"),
        default=None,
        help="basis choice; the default follows the model's tabulated diagnostics",
    )
    p.add_argument("--flag-threshold", type=float, default=0.02)
    p.add_argument("--svg", default=None)

    p = sub.add_parser("rstat", help="gap-ratio statistic in a symmetry sector")
    common(p, length_default=16)
    p.add_argument("--sector", default="s2+1,usm+1", help="e.g. s2+1,usm+1 or none")

    p = sub.add_parser("bch", help="projected norms of the series terms")
    common(p, length_default=16)
    p.add_argument("--orders", type=int, default=8)
    p.add_argument("--subspace", choices=("working", "krylov", "full"), default="working")
    p.add_argument("--bandwidth", type=float, default=None, help="also report the golden-rule rate")
    p.add_argument("--svg", default=None)

    p = sub.add_parser("sga-check", help="tower-algebra residual of the exact model")
    p.add_argument("-L", "--length", type=int, default=8)
    p.add_argument("--epsilon", type=float, default=None)

    p = sub.add_parser("spinrep-check", help="spin representation versus gate table")
    p.add_argument("--model", required=True)

    return parser


def _load(name):
    from .models import load_model

    return load_model(name)


def _subspace(model, length, mode):
    from .basis import BasisSubset
    from .hamiltonian import krylov_subspace
    from .models import working_subspace

    if mode == "full":
        return BasisSubset.full_space(length)
    if mode == "krylov":
        return krylov_subspace(model.circuit(length), model.orbit_seed(length))
    return working_subspace(model, length)


def _seed_index(spec: str, model, length: int) -> int:
    from .basis import tile_pattern

    if spec == "neel":
        return tile_pattern("01", length) if model.geometry == "stride2" else model.orbit_seed(length)
    if spec == "polarized":
        return tile_pattern("1", length)
    if set(spec) <= {"0", "1"} and len(spec) == length:
        return int(spec, 2)
    raise ValueError(f"seed {spec!r} is not a preset or an L-bit string")


def _params(args, **extra) -> dict:
    skip = {"out", "svg", "config", "threads", "command", "workers"}
    params = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    params.update(extra)
    params["command"] = args.command
    return params


def cmd_orbit(args) -> int:
    from .automaton import orbit_of
    from .output import metadata_object
    from . import __version__

    model = _load(args.model)
    seed = _seed_index(args.seed, model, args.length)
    orbit = orbit_of(model.circuit(args.length), seed)
    payload = orbit.to_json()
    payload["metadata"] = metadata_object(__version__, _params(args))
    text = json.dumps(payload, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_rules(args) -> int:
    from .models import neel_orbit_states
    from .output import metadata_object
    from .rules import rule_report
    from . import __version__

    model = _load(args.model)
    kind = args.kind or model.expected.get("rule_kind", "I")
    circuit = model.circuit(args.length)
    states = neel_orbit_states(model, args.length)
    if kind == "I":
        n = model.expected.get("n") or 6
        report = rule_report(circuit, states, n, "I")
    else:
        from .logmap import closing_relation, principal_log

        h = principal_log(circuit.gate)
        n = model.expected.get("closing_power") or closing_relation(h, model.expected.get("n", 6)).power
        report = rule_report(circuit, states, n, "II", h_local=h.matrix)
    payload = report.to_json()
    payload["model"] = model.name
    payload["metadata"] = metadata_object(__version__, _params(args, kind=kind, n=n))
    text = json.dumps(payload, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(f"rules type {kind}: {report.satisfied}/{report.total}", file=sys.stderr)
    return EXIT_OK


def cmd_search(args) -> int:
    from .output import metadata_object
    from .rules import SearchConstraints, search_models
    from . import __version__

    constraints = SearchConstraints(
        order=args.order,
        rule_powers=args.order,
        require_orbit_cycle=args.require_cycle,
    )
    results = search_models(constraints, workers=args.workers or 1)
    if args.top:
        results = results[: args.top]
    payload = {
        "metadata": metadata_object(__version__, _params(args)),
        "results": [r.to_json() for r in results],
    }
    text = json.dumps(payload, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(f"search: {len(results)} gates", file=sys.stderr)
    return EXIT_OK


def cmd_revivals(args) -> int:
    import numpy as np

    from .dynamics import Propagator, fidelity_trace, generic_comparison_state, local_z_trace, pr_trace
    from .hamiltonian import build_hamiltonian
    from .models import neel_orbit_states
    from .output import write_csv, write_svg_lines
    from . import __version__

    model = _load(args.model)
    subset = _subspace(model, args.length, "working")
    chain = build_hamiltonian(model.circuit(args.length), subset)
    if args.state == "generic":
        seed = generic_comparison_state(subset, neel_orbit_states(model, args.length), chain.h)
    else:
        seed = _seed_index(args.state, model, args.length)
    prop = Propagator(chain.h, subset)
    times = np.arange(0.0, args.tmax + 0.5 * args.dt, args.dt)
    psi0 = np.zeros(subset.size, dtype=complex)
    psi0[subset.position(seed)] = 1.0
    result = prop.evolve(psi0, times)
    pr = pr_trace(result)
    fid = fidelity_trace(result, seed)
    columns = ["t", "pr", "fidelity"]
    data = [times, pr, fid]
    if args.site is not None:
        series, z_mc = local_z_trace(prop, seed, times, args.site, args.window)
        columns.append(f"z_{args.site}")
        data.append(series)
        columns.append(f"z_{args.site}_deviation_sq")
        data.append(np.abs(series - z_mc) ** 2)
    from .basis import bitstring

    rows = zip(*data)
    params = _params(args, n_eff=subset.size, seed=bitstring(seed, args.length))
    if args.out:
        write_csv(args.out, __version__, params, columns, rows)
    else:
        print(",".join(columns))
        for row in zip(*data):
            print(",".join(f"{v:.12g}" for v in row))
    if args.svg:
        write_svg_lines(args.svg, f"{model.name} L={args.length}", times, {"pr": pr, "fidelity": fid}, log_y=True)
    return EXIT_OK


def cmd_ipr(args) -> int:
    from .basis import tile_pattern
    from .hamiltonian import build_hamiltonian
    from .output import write_csv, write_svg_scatter
    from .spectral import analyze_spectrum
    from . import __version__

    model = _load(args.model)
    mode = args.subspace or ("full" if model.name == "qmbs-c" else "working")
    subset = _subspace(model, args.length, mode)
    chain = build_hamiltonian(model.circuit(args.length), subset)
    refs = [tile_pattern("10", args.length), tile_pattern("01", args.length)]
    analysis = analyze_spectrum(chain.h, subset, refs, args.flag_threshold)
    rows = zip(
        analysis.eigenvalues,
        analysis.ipr,
        analysis.overlaps.max(axis=1),
        analysis.flagged.astype(int),
    )
    params = _params(args, n_eff=subset.size, subspace=mode)
    columns = ["energy", "ipr", "neel_overlap", "flagged"]
    if args.out:
        write_csv(args.out, __version__, params, columns, rows)
    else:
        for row in rows:
            print(",".join(str(v) for v in row))
    if args.svg:
        write_svg_scatter(
            args.svg,
            f"{model.name} L={args.length} IPR",
            analysis.eigenvalues,
            analysis.ipr,
            analysis.flagged,
            log_y=True,
        )
    return EXIT_OK


def _parse_sector(spec: str):
    from .hamiltonian import SymmetrySector

    if spec in ("none", ""):
        return None
    ops = []
    for field in spec.split(","):
        field = field.strip().lower()
        name = {"s2": "S2", "usm": "USM"}.get(field[:-2])
        if name is None or field[-2:] not in ("+1", "-1"):
            raise ValueError(f"bad sector component {field!r} (want e.g. s2+1)")
        ops.append((name, 1 if field.endswith("+1") else -1))
    return SymmetrySector(tuple(ops))


def cmd_rstat(args) -> int:
    import numpy as np

    from .hamiltonian import build_hamiltonian, project_sector
    from .output import write_csv
    from .spectral import r_statistic
    from . import __version__

    model = _load(args.model)
    subset = _subspace(model, args.length, "working")
    chain = build_hamiltonian(model.circuit(args.length), subset)
    sector = _parse_sector(args.sector)
    if sector is None:
        if subset.size > 6000:
            raise ValueError(
                f"direct diagonalization refused at dimension {subset.size}; pass --sector"
            )
        dense = chain.h.toarray()
        evals = np.linalg.eigvalsh(dense)
    else:
        hs, _ = project_sector(chain.h, subset, sector)
        evals = np.linalg.eigvalsh(hs)
    report = r_statistic(evals)
    centers = 0.5 * (report.bin_edges[:-1] + report.bin_edges[1:])
    params = _params(args, n_levels=len(evals), mean_r=report.mean)
    rows = zip(centers, report.density)
    if args.out:
        write_csv(args.out, __version__, params, ["r_bin_center", "density"], rows)
    print(f"levels={len(evals)} mean_r={report.mean:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_bch(args) -> int:
    from .bch import bch_terms, fgr_rate, norm_profile
    from .hamiltonian import build_hamiltonian
    from .models import neel_orbit_states
    from .output import write_csv, write_svg_lines
    from . import __version__

    model = _load(args.model)
    subset = _subspace(model, args.length, args.subspace)
    chain = build_hamiltonian(model.circuit(args.length), subset)
    series = bch_terms(chain.a, chain.b, args.orders)
    orbit = neel_orbit_states(model, args.length)
    positions = [subset.position(s) for s in orbit]
    profile = norm_profile(series, positions)
    params = _params(args, n_eff=subset.size)
    if args.bandwidth:
        estimate = fgr_rate(series, positions, args.length, args.bandwidth)
        params["fgr_rate"] = estimate.rate
        print(f"fgr_rate={estimate.rate:.6g}", file=sys.stderr)
    rows = zip(profile.orders, profile.orbit_norm, profile.leakage_norm, profile.generic_norm)
    columns = ["n", "orbit_norm", "leakage_norm", "generic_norm"]
    if args.out:
        write_csv(args.out, __version__, params, columns, rows)
    else:
        print(",".join(columns))
        for row in zip(profile.orders, profile.orbit_norm, profile.leakage_norm, profile.generic_norm):
            print(",".join(f"{v:.12g}" for v in row))
    if args.svg:
        write_svg_lines(
            args.svg,
            f"{model.name} L={args.length} series norms",
            profile.orders,
            {"orbit": profile.orbit_norm, "leakage": profile.leakage_norm, "generic": profile.generic_norm},
            log_y=True,
        )
    return EXIT_OK


def cmd_sga_check(args) -> int:
    import numpy as np

    from .models import sga_check

    eps = args.epsilon if args.epsilon is not None else float(np.pi)
    residual = sga_check(args.length, eps)
    print(f"sga residual (L={args.length}, epsilon={eps:.12g}): {residual:.3e}")
    return EXIT_OK


def cmd_spinrep_check(args) -> int:
    from .models import verify_spin_representation

    model = _load(args.model)
    deviation = verify_spin_representation(model)
    print(f"spin representation deviation ({model.name}): {deviation:.3e}")
    return EXIT_OK


HANDLERS = {
    "orbit": cmd_orbit,
    "rules": cmd_rules,
    "search": cmd_search,
    "revivals": cmd_revivals,
    "ipr": cmd_ipr,
    "rstat": cmd_rstat,
    "bch": cmd_bch,
    "sga-check": cmd_sga_check,
    "spinrep-check": cmd_spinrep_check,
}


def _inject_config(argv: list[str]) -> list[str]:
    """Expand --config entries into flags placed right after the subcommand,
    so explicitly passed flags still win."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    values = _read_config_file(known.config)
    extra = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if key == "L" or key == "length":
            flag = "-L"
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                extra.append(flag)
        else:
            extra.extend([flag, value])
    for i, token in enumerate(argv):
        if token in HANDLERS:
            return argv[: i + 1] + extra + argv[i + 1 :]
    return argv


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _apply_threads(argv)
    parser = build_parser()
    try:
        argv = _inject_config(argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)

    from .automaton import CycleOverflowError
    from .dynamics import NormDriftError
    from .hamiltonian import SubsetNotClosedError
    from .models import UnknownModelError

    try:
        return HANDLERS[args.command](args)
    except UnknownModelError as exc:
        print(f"error: unknown model {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_MODEL
    except (SubsetNotClosedError, NormDriftError, CycleOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
