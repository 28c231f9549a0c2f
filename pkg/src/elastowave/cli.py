"""The `elastowave` command: run scenarios, sweeps, and presets."""

import argparse
import sys

from .config import parse_config
from .errors import ConfigError, DivergenceError, GeometryError, MeshFormatError
from .scenarios import PRESETS, converge_sweep, preset_config, preset_text, run_scenario

EXIT_PARSE = 2
EXIT_GEOMETRY = 3
EXIT_DIVERGENCE = 4
EXIT_IO = 5


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="elastowave",
        description="Coupled elasto-acoustic wave propagation on spectral elements.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a config file")
    run.add_argument("-c", "--config", required=True, help="INI config path")
    run.add_argument("--threads", type=int, help="worker threads for the kernels")
    run.add_argument("--output-dir", help="override the [output] directory")

    conv = sub.add_parser("converge", help="refinement sweep against the analytic model")
    conv.add_argument("-c", "--config", required=True, help="INI config path")
    conv.add_argument("--sweep", choices=("h", "N"), required=True)
    conv.add_argument(
        "--values", required=True,
        help="comma-separated meshsizes (h) or degrees (N)",
    )
    conv.add_argument("--threads", type=int)
    conv.add_argument("--output-dir")

    pre = sub.add_parser("preset", help="run (or print) a built-in scenario")
    pre.add_argument("name", help=", ".join(sorted(PRESETS)))
    pre.add_argument("--full", action="store_true", help="full-size variant")
    pre.add_argument(
        "--print", action="store_true", dest="print_only",
        help="print the preset config instead of running it",
    )
    pre.add_argument("--threads", type=int)
    pre.add_argument("--output-dir")
    return p


def _set_threads(n) -> None:
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    from .kernels import HAS_NUMBA

    if HAS_NUMBA:
        import numba

        numba.set_num_threads(n)


def _print_run(res) -> None:
    print(f"steps: {res.steps}  dt: {res.dt:.6g}  t_end: {res.state.t:.6g}")
    if res.errors is not None:
        print(
            f"energy error: {res.errors['energy']:.6e}  "
            f"l2 error: {res.errors['l2']:.6e}"
        )
    if res.output_dir:
        print(f"outputs in {res.output_dir}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _set_threads(args.threads)
        if args.command == "run":
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
            _print_run(run_scenario(cfg, output_dir=args.output_dir))
        elif args.command == "converge":
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
            values = [float(v) for v in args.values.replace(",", " ").split()]
            if args.sweep == "N":
                values = [int(v) for v in values]
            table = converge_sweep(cfg, args.sweep, values, output_dir=args.output_dir)
            for x, ee, el in zip(
                table["values"], table["energy_error"], table["l2_error"]
            ):
                print(f"{args.sweep} = {x:g}  energy {ee:.6e}  l2 {el:.6e}")
            print(
                f"energy rate: {table['rate_energy']:.3f} (R2 {table['r2_energy']:.4f})  "
                f"l2 rate: {table['rate_l2']:.3f} (R2 {table['r2_l2']:.4f})"
            )
        else:
            if args.print_only:
                print(preset_text(args.name, args.full), end="")
            else:
                cfg = preset_config(args.name, args.full)
                _print_run(run_scenario(cfg, output_dir=args.output_dir))
    except (ConfigError, MeshFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
