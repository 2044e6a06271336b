"""Command-line experiment runner.

Four subcommands cover the reproduction workflow:

* ``table``       print the located-error syndrome table and verify it
                  against the checked-in golden copy;
* ``characterize`` run a full 31-setting characterization and write the
                  reconstructed process matrix, its distance from the
                  damping closed form, the fidelity score, and the raw
                  syndrome histograms;
* ``failure-sweep`` Monte-Carlo the ancilla-noise failure rate across a
                  grid of depolarizing strengths;
* ``selftest``    fast end-to-end invariant checks.

Settings resolve with precedence defaults < config file < flags, and
every experiment output embeds the effective-config hash and seed so a
result file can always be traced to the run that made it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import (
    channel_fidelity_vs_theory,
    chi_distance_report,
    failure_oracle,
    failure_rate_experiment,
)
from .channels import pauli_unitary_channel, theoretical_chi_ad
from .codes import build_s1, located_error_table
from .config import (
    BACKENDS,
    CODE_SCENARIOS,
    ConfigError,
    DEFAULTS,
    ExperimentConfig,
    load_config_file,
    merge_settings,
)
from .pauli import single_site
from .process_matrix import BASIS_LABELS
from .protocol import PreprocessingKind, PreprocessingOp, characterize, run_setting

__all__ = ["main"]

GOLDEN_TABLE = "data/located_error_table.csv"
DEFAULT_SWEEP_GRID = "0.02,0.05,0.1,0.2,0.3"


def _real(value: float) -> str:
    return format(float(value), ".17g")


def _table_csv_text() -> str:
    lines = ["index,operator,syndrome"]
    for idx, _, syn in located_error_table(build_s1()):
        lines.append(f"{idx},{BASIS_LABELS[idx]},{syn}")
    return "\n".join(lines) + "\n"


def _golden_table_text() -> str:
    return resources.files("dcqd").joinpath(GOLDEN_TABLE).read_text()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_config(args, scenario_override: str | None = None) -> ExperimentConfig:
    cli_values = {
        key: getattr(args, key, None)
        for key in ("scenario", "gamma", "p", "shots", "seed", "backend", "workers")
    }
    if scenario_override is not None:
        cli_values["scenario"] = scenario_override
    file_values = load_config_file(args.config) if getattr(args, "config", None) else None
    return merge_settings(file_values, cli_values)


def cmd_table(args) -> int:
    computed = _table_csv_text()
    for idx, _, syn in located_error_table(build_s1()):
        print(f"{BASIS_LABELS[idx]}, {syn}")
    if args.out is not None:
        out = _out_dir(args)
        (out / "located_error_table.csv").write_text(computed)
    golden = _golden_table_text()
    if computed != golden:
        print("located-error table does not match the golden copy", file=sys.stderr)
        return 1
    return 0


def cmd_characterize(args) -> int:
    config = _build_config(args)
    if config.scenario not in CODE_SCENARIOS:
        raise ConfigError(
            f"scenario must be one of {CODE_SCENARIOS} for characterize, got {config.scenario!r}"
        )
    result = characterize(config)
    fid = channel_fidelity_vs_theory(result.chi, config.gamma)
    diff = chi_distance_report(result.chi, theoretical_chi_ad(config.gamma))
    out = _out_dir(args)
    header = f"# config={config.config_hash()} seed={config.seed}\n"

    real_lines = [header + "m,n,value"]
    imag_lines = [header + "m,n,value"]
    diff_lines = [
        header + f"# max_abs_diff={_real(diff.max_abs)}\n" + "m,n,real,imag"
    ]
    for m in range(16):
        for n in range(16):
            lm, ln = BASIS_LABELS[m], BASIS_LABELS[n]
            entry = result.chi.data[m, n]
            real_lines.append(f"{lm},{ln},{_real(entry.real)}")
            imag_lines.append(f"{lm},{ln},{_real(entry.imag)}")
            d = diff.difference[m, n]
            diff_lines.append(f"{lm},{ln},{_real(d.real)},{_real(d.imag)}")
    (out / "chi_real.csv").write_text("\n".join(real_lines) + "\n")
    (out / "chi_imag.csv").write_text("\n".join(imag_lines) + "\n")
    (out / "chi_diff_vs_theory.csv").write_text("\n".join(diff_lines) + "\n")

    _write_json(
        out / "fidelity.json",
        {
            "config": config.config_hash(),
            "seed": config.seed,
            "scenario": config.scenario,
            "gamma": config.gamma,
            "p": config.p,
            "shots": config.shots,
            "backend": config.backend,
            "fidelity": fid.value,
            "input_state": fid.input_state,
            "compared": list(fid.compared),
            "max_abs_diff_vs_theory": diff.max_abs,
        },
    )
    _write_json(
        out / "histograms.json",
        {
            "config": config.config_hash(),
            "seed": config.seed,
            "settings": [h.to_jsonable() for h in result.histograms],
        },
    )
    _write_json(
        out / "effective_config.json",
        dict(result.config.to_dict(), config_hash=config.config_hash()),
    )
    print(f"scenario {config.scenario}: fidelity vs theory = {fid.value:.6f}")
    return 0


def cmd_failure_sweep(args) -> int:
    config = _build_config(args, scenario_override="failure_sweep")
    try:
        p_values = [float(tok) for tok in args.p_values.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"p-values must be comma-separated reals: {exc}") from exc
    if not p_values:
        raise ConfigError("p-values grid is empty")
    reports = failure_rate_experiment(p_values, config.shots, config.seed)
    out = _out_dir(args)
    header = f"# config={config.config_hash()} seed={config.seed}\n"
    lines = [header + "p,p_identity_syndrome,P_identity,delta_p1,p_00,p_F,analytic_p_F"]
    for r in reports:
        lines.append(
            ",".join(
                _real(v)
                for v in (
                    r.p,
                    r.p_identity_syndrome,
                    r.p_identity_operator,
                    r.delta_p1,
                    r.p_00,
                    r.p_F,
                    r.analytic_p_F,
                )
            )
        )
    (out / "failure_sweep.csv").write_text("\n".join(lines) + "\n")
    _write_json(
        out / "effective_config.json",
        dict(config.to_dict(), config_hash=config.config_hash(), p_values=p_values),
    )
    oracle = failure_oracle()
    coeffs = ", ".join(
        f"w{w + 1}: {c}" for w, c in enumerate(oracle.failure_coefficients)
    )
    print(f"failure-rate coefficients per weight: {coeffs}")
    print(f"wrote {out / 'failure_sweep.csv'}")
    return 0


def _selftest_checks():
    def check_table():
        if _table_csv_text() != _golden_table_text():
            return "computed table differs from golden copy"
        return None

    def check_codeword():
        from .codes import codeword_state

        psi = codeword_state(build_s1())
        hot = {format(i, "06b") for i in np.nonzero(np.abs(psi) > 1e-12)[0]}
        want = {"000000", "001111", "010101", "011010", "100011", "101100", "110110", "111001"}
        if hot != want:
            return f"codeword support {sorted(hot)} != expected"
        amps = psi[np.abs(psi) > 1e-12]
        if np.max(np.abs(amps - 1 / np.sqrt(8))) > 1e-10:
            return "codeword amplitudes deviate from 1/sqrt(8)"
        return None

    def check_exact_identity():
        cfg = ExperimentConfig(
            scenario="clean", gamma=0.4, p=0.0, shots=1, seed=1, backend="exact"
        )
        gap = characterize(cfg).chi.max_abs_diff(theoretical_chi_ad(0.4))
        if gap > 1e-9:
            return f"exact-backend reconstruction off by {gap}"
        return None

    def check_oracle():
        oracle = failure_oracle()
        got = [
            (c.weight, c.detected, c.stabilizer, c.impostor) for c in oracle.weight_counts
        ]
        want = [(1, 12, 0, 0), (2, 36, 0, 18), (3, 84, 0, 24), (4, 60, 3, 18)]
        if got != want:
            return f"oracle classification {got} != {want}"
        if [str(c) for c in oracle.failure_coefficients] != ["0", "1/3", "2/9", "7/27"]:
            return f"oracle coefficients {oracle.failure_coefficients}"
        return None

    def check_filter():
        channel = pauli_unitary_channel(single_site(6, 3, "X"))
        hist = run_setting(
            build_s1(),
            channel,
            PreprocessingOp(PreprocessingKind.IDENTITY),
            shots=1,
            seed=1,
            backend="exact",
        )
        if hist.accepted != 0.0:
            return f"weight-one ancilla error leaked {hist.accepted} accepted mass"
        return None

    def check_determinism():
        cfg = dict(scenario="s1_noisy", gamma=0.4, p=0.1, shots=20_000, seed=99, backend="sampling")
        a = characterize(ExperimentConfig(**cfg, workers=1))
        b = characterize(ExperimentConfig(**cfg, workers=3))
        for ha, hb in zip(a.histograms, b.histograms):
            if not np.array_equal(ha.counts, hb.counts):
                return f"worker counts diverge in setting {ha.setting.label}"
        return None

    return [
        ("golden table", check_table),
        ("codeword superposition", check_codeword),
        ("exact-backend reconstruction", check_exact_identity),
        ("failure oracle counts", check_oracle),
        ("ancilla filter soundness", check_filter),
        ("worker determinism", check_determinism),
    ]


def cmd_selftest(args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        start = time.time()
        problem = check()
        elapsed = time.time() - start
        if problem is None:
            print(f"ok: {name} ({elapsed:.2f}s)")
        else:
            failures += 1
            print(f"FAIL: {name}: {problem}", file=sys.stderr)
    return 1 if failures else 0


def _add_run_flags(parser: argparse.ArgumentParser, with_scenario: bool) -> None:
    parser.add_argument("--config", help="JSON file with experiment settings")
    if with_scenario:
        parser.add_argument("--scenario", choices=CODE_SCENARIOS, help="noise scenario to run")
    parser.add_argument("--gamma", type=float, help="amplitude-damping strength on qubit 1")
    parser.add_argument("--p", type=float, help="depolarizing strength per ancilla qubit")
    parser.add_argument("--shots", type=int, help="shots per measurement setting")
    parser.add_argument("--seed", type=int, help="master seed for all random streams")
    parser.add_argument("--backend", choices=BACKENDS, help="sampling or exact probabilities")
    parser.add_argument("--workers", type=int, help="worker threads for shot sampling")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcqd",
        description="syndrome-based process characterization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_table = sub.add_parser("table", help="print and verify the located-error table")
    p_table.add_argument("--out", help="directory to write the table CSV into")
    p_table.set_defaults(func=cmd_table)

    p_char = sub.add_parser("characterize", help="run a full characterization")
    _add_run_flags(p_char, with_scenario=True)
    p_char.add_argument("--out", default="results", help="output directory")
    p_char.set_defaults(func=cmd_characterize)

    p_sweep = sub.add_parser("failure-sweep", help="failure rate vs depolarizing strength")
    _add_run_flags(p_sweep, with_scenario=False)
    p_sweep.add_argument(
        "--p-values",
        default=DEFAULT_SWEEP_GRID,
        help="comma-separated depolarizing grid",
    )
    p_sweep.add_argument("--out", default="results", help="output directory")
    p_sweep.set_defaults(func=cmd_failure_sweep)

    p_self = sub.add_parser("selftest", help="fast invariant checks")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
