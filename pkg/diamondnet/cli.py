"""Command-line interface for diamondnet."""

import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from diamondnet import __version__
from diamondnet.asymmetric import (
    certified_ratio,
    parallel_upper_bound,
    partition,
    select_and_rate,
    single_relay_rates,
)
from diamondnet.channel_sim import (
    MIN_VALIDATION_SYMBOLS,
    SimConfig,
    max_alpha,
    validate_af_snr,
)
from diamondnet.config import load_config
from diamondnet.converse import cutset_objective
from diamondnet.cut_oracle import brute_force_min_cut, oracle_check_eta
from diamondnet.exceptions import CertificateViolationError, DiamondNetError
from diamondnet.models import AsymmetricNetwork, SweepSpec, SymmetricNetwork
from diamondnet.report import build_bound_report, check_report, counterexample_table
from diamondnet.sweep import SweepRunner, json_scalar
from diamondnet.visualization import GapChartGenerator

# Configure logging (stderr; stdout carries JSON/CSV)
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2

ORACLE_TOL = 1e-9
PATH_TOL = 1e-10
Z_LIMIT = 6.0


class DiamondGroup(click.Group):
    """Click group mapping failures onto exit codes: 1 for bad input, 2 for violations."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            code = super().main(*args, **kwargs)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(code if isinstance(code, int) else EXIT_OK)


def _input_error(message: str) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(EXIT_USAGE)


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}")


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2))


@click.group(cls=DiamondGroup)
@click.version_option(version=__version__)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Path to settings YAML file (default: diamondnet.yaml if present)",
)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="INFO",
    help="Logging level",
)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], log_level: str):
    """diamondnet - Capacity bounds and gap certificates for Gaussian diamond networks."""
    logging.getLogger().setLevel(log_level.upper())
    try:
        ctx.obj = load_config(config_path)
    except (ValidationError, ValueError) as e:
        _input_error(f"invalid settings: {e}")


@cli.command()
@click.option("--n", "n_relays", type=int, required=True, help="Number of relays")
@click.option("--g", type=float, required=True, help="Source-to-relay power gain")
@click.option("--h", type=float, required=True, help="Relay-to-destination power gain")
@click.option(
    "--certificates-only",
    is_flag=True,
    help="Skip the numeric duty-cycle and correlation searches",
)
@click.pass_obj
def bounds(config, n_relays: int, g: float, h: float, certificates_only: bool):
    """Report every bound for one symmetric network as JSON."""
    try:
        net = SymmetricNetwork(n_relays=n_relays, g=g, h=h)
        report = build_bound_report(net, config, research=not certificates_only)
    except (ValidationError, ValueError) as e:
        _input_error(str(e))

    violations = check_report(report, config)
    click.echo(report.model_dump_json(indent=2))
    if violations:
        sys.exit(EXIT_VIOLATION)


@cli.command()
@click.option("--n-list", default=None, help="Comma-separated relay counts")
@click.option("--g-min", type=float, default=None, help="Smallest source gain")
@click.option("--g-max", type=float, default=None, help="Largest source gain")
@click.option("--h-min", type=float, default=None, help="Smallest destination gain")
@click.option("--h-max", type=float, default=None, help="Largest destination gain")
@click.option("--points-per-decade", type=int, default=None, help="Grid density")
@click.option(
    "--output",
    type=click.Path(path_type=Path),
    required=True,
    help="Table file to write",
)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option(
    "--certificates-only",
    is_flag=True,
    help="Leave the numeric search columns empty",
)
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option(
    "--chart",
    type=click.Path(path_type=Path),
    default=None,
    help="Optional SVG of the worst gaps over the (g, h) grid",
)
@click.pass_obj
def sweep(
    config,
    n_list: Optional[str],
    g_min: Optional[float],
    g_max: Optional[float],
    h_min: Optional[float],
    h_max: Optional[float],
    points_per_decade: Optional[int],
    output: Path,
    fmt: str,
    certificates_only: bool,
    workers: Optional[int],
    chart: Optional[Path],
):
    """Certify the gap constants over an (N, g, h) grid."""
    try:
        spec = SweepSpec(
            n_list=_parse_int_list(n_list) if n_list else config.sweep_n_list,
            g_min=g_min if g_min is not None else config.sweep_gain_min,
            g_max=g_max if g_max is not None else config.sweep_gain_max,
            h_min=h_min if h_min is not None else config.sweep_gain_min,
            h_max=h_max if h_max is not None else config.sweep_gain_max,
            points_per_decade=points_per_decade or config.sweep_points_per_decade,
            output=output,
            format=fmt,
        )
    except ValidationError as e:
        _input_error(f"invalid sweep: {e}")

    runner = SweepRunner(spec, config, research=not certificates_only, workers=workers)
    df, summary = runner.run()
    try:
        summary.output = str(runner.save(df))
        if chart is not None:
            GapChartGenerator(df).plot_gap_maps(chart)
    except OSError as e:
        _input_error(f"cannot write output: {e}")

    click.echo(summary.model_dump_json(indent=2))
    if summary.violations:
        sys.exit(EXIT_VIOLATION)


@cli.command()
@click.option(
    "--family",
    type=click.Choice(["additive", "multiplicative"]),
    required=True,
    help="Gain scaling family",
)
@click.option("--n-list", required=True, help="Comma-separated relay counts (>= 2)")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json")
@click.option("--no-cutset", is_flag=True, help="Skip the numeric refined cut-set bound")
@click.pass_obj
def counterexample(config, family: str, n_list: str, fmt: str, no_cutset: bool):
    """Compare the min-cut bound with the refined bounds along a scaling family."""
    try:
        table = counterexample_table(family, _parse_int_list(n_list), config, cutset=not no_cutset)
    except (ValidationError, ValueError) as e:
        _input_error(str(e))

    if fmt == "csv":
        click.echo(table.to_csv(index=False, lineterminator="\n"), nl=False)
    else:
        records = table.to_dict(orient="records")
        _echo_json([{key: json_scalar(value) for key, value in row.items()} for row in records])


@cli.command()
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_obj
def asym(config, input_file: Path):
    """Run relay selection and the ratio certificate on a JSON file with "g" and "h" arrays."""
    try:
        with open(input_file, encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict) or "g" not in data or "h" not in data:
            raise ValueError('expected an object with "g" and "h" arrays')
        net = AsymmetricNetwork(gains_g=data["g"], gains_h=data["h"])
        parts = partition(net)
        selection = select_and_rate(net, config)
        witnesses = single_relay_rates(net)
    except (ValidationError, ValueError) as e:
        _input_error(str(e))
    except DiamondNetError as e:
        logger.error(f"Partition failed: {e}")
        sys.exit(EXIT_VIOLATION)

    payload = {
        "n_relays": net.n_relays,
        "L": parts.L,
        "L_tilde": parts.L_tilde,
        "class_sizes": parts.sizes(),
        "selected_class": selection.class_id,
        "selected_relays": selection.members,
        "delta": selection.delta,
        "certified_rate": selection.certified,
        "empirical_rate": selection.empirical,
        "outside_guarantee": selection.outside_guarantee,
        "single_relay_rates": witnesses.model_dump(),
    }
    exit_code = EXIT_OK
    try:
        parallel = parallel_upper_bound(net)
        payload["parallel_upper"] = parallel.total
        certificate = certified_ratio(net, config, selection)
        payload.update(certificate.model_dump())
    except CertificateViolationError as e:
        payload.update(e.details)
        exit_code = EXIT_VIOLATION
    except DiamondNetError as e:
        logger.error(f"Certificate could not be evaluated: {e}")
        payload["error"] = str(e)
        exit_code = EXIT_VIOLATION

    _echo_json(payload)
    sys.exit(exit_code)


@cli.command()
@click.option("--n", "n_relays", type=int, required=True, help="Number of relays (2..20)")
@click.option("--rho", type=float, required=True, help="Common relay correlation")
@click.option("--g", type=float, default=1.0, show_default=True)
@click.option("--h", type=float, default=1.0, show_default=True)
@click.pass_obj
def oracle(config, n_relays: int, rho: float, g: float, h: float):
    """Check eta and the integer cut reduction against brute-force linear algebra."""
    try:
        checks = [oracle_check_eta(n_relays, rho, n, config) for n in range(n_relays + 1)]
        net = SymmetricNetwork(n_relays=n_relays, g=g, h=h)
        brute = brute_force_min_cut(net, rho, config)
        reduced = cutset_objective(net, rho)
    except (ValidationError, ValueError) as e:
        _input_error(str(e))

    eta_ok = all(c.abs_err <= ORACLE_TOL * max(1.0, c.closed) for c in checks)
    path_ok = all(c.path_err <= PATH_TOL * max(1.0, c.closed) for c in checks)
    cut_error = abs(brute.value - reduced.value)
    payload = {
        "n_relays": n_relays,
        "rho": rho,
        "max_eta_error": max(c.abs_err for c in checks),
        "max_path_error": max(c.path_err for c in checks),
        "eta": [c.closed for c in checks],
        "brute_force_min_cut": brute.value,
        "brute_force_subset": list(brute.subset.members),
        "integer_min_cut": reduced.value,
        "integer_cut_index": reduced.cut_index,
        "min_cut_error": cut_error,
        "pinv_rcond": config.pinv_rcond,
    }
    _echo_json(payload)
    if not (eta_ok and path_ok and cut_error <= ORACLE_TOL):
        logger.error("Oracle disagreement above tolerance")
        sys.exit(EXIT_VIOLATION)


@cli.command()
@click.option("--n", "n_relays", type=int, required=True, help="Number of relays")
@click.option("--g", type=float, required=True, help="Source-to-relay power gain")
@click.option("--h", type=float, required=True, help="Relay-to-destination power gain")
@click.option("--alpha", type=float, default=None, help="Amplification (default 1/sqrt(1+g))")
@click.option(
    "--symbols",
    type=click.IntRange(min=MIN_VALIDATION_SYMBOLS),
    default=1_000_000,
    show_default=True,
    help=f"Symbols to simulate (at least {MIN_VALIDATION_SYMBOLS})",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_obj
def simulate(
    config, n_relays: int, g: float, h: float, alpha: Optional[float], symbols: int, seed: int
):
    """Monte Carlo check of the amplify-and-forward output SNR and relay power."""
    try:
        net = SymmetricNetwork(n_relays=n_relays, g=g, h=h)
        cfg = SimConfig(
            net=net,
            alpha=max_alpha(net) if alpha is None else alpha,
            num_symbols=symbols,
            seed=seed,
        )
        check = validate_af_snr(cfg, config)
    except (ValidationError, ValueError) as e:
        _input_error(str(e))

    payload = check.result.model_dump()
    payload.update(
        {
            "alpha": cfg.alpha,
            "closed_snr": check.closed_snr,
            "z_score": check.z_score,
            "closed_relay_power": check.closed_relay_power,
            "relay_z_score": check.relay_z_score,
        }
    )
    _echo_json(payload)
    if abs(check.z_score) > Z_LIMIT or abs(check.relay_z_score) > Z_LIMIT:
        logger.error(f"Simulation deviates from closed form (z={check.z_score:.3f})")
        sys.exit(EXIT_VIOLATION)


if __name__ == "__main__":
    cli()
