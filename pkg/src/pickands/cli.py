"""Command-line front end: simulate, estimate, project, mise.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 I/O
error, 4 numerical failure.  Failures emit a machine-readable JSON object
on stderr.  All commands are deterministic given their flags.
"""

import csv
import json
import sys

import click
import numpy as np

from . import empirical, estimators, projection, sampling, spectral, study
from .simplex import midpoint_rule

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


@click.group()
def cli():
    """Rank-based dependence-function estimation for extreme-value copulas."""


def _params_from_flags(alpha, theta, phi, psi):
    return sampling.AsymmetricLogisticParams(alpha=alpha, theta=theta, phi=phi, psi=psi)


@cli.command()
@click.option("--model", type=click.Choice(["asylog", "maxlinear"]), default="asylog")
@click.option("--alpha", type=float, default=1.0, help="dependence parameter in (0,1]")
@click.option("--theta", type=float, default=0.0)
@click.option("--phi", type=float, default=0.0)
@click.option("--psi", type=float, default=1.0)
@click.option("--measure", "measure_path", type=click.Path(), default=None,
              help="spectral measure file (CSV or JSON) for --model maxlinear")
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--stream", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def simulate(model, alpha, theta, phi, psi, measure_path, n, seed, stream, out):
    """Draw max-stable samples with unit Frechet margins and write a CSV."""
    rng = sampling.RngStream(seed=seed, stream=stream)
    if model == "asylog":
        params = _params_from_flags(alpha, theta, phi, psi)
        data = sampling.sample_asy_logistic(params, n, rng)
    else:
        if measure_path is None:
            raise click.UsageError("--model maxlinear requires --measure")
        measure = _read_measure(measure_path)
        data = sampling.sample_max_linear(measure, n, rng)
    empirical.write_data_csv(data, out)
    click.echo(f"wrote {data.shape[0]}x{data.shape[1]} sample to {out}")


def _read_measure(path) -> spectral.SpectralMeasure:
    if str(path).endswith(".json"):
        return spectral.read_measure_json(path)
    return spectral.read_measure_csv(path)


@cli.command()
@click.option("--input", "input_path", type=click.Path(), required=True)
@click.option("--p", "p_expected", type=int, default=None,
              help="expected column count, validated against the file")
@click.option("--estimator", type=click.Choice(estimators.KINDS), default="cfg")
@click.option("--correction", type=click.Choice(estimators.CORRECTIONS), default="linear")
@click.option("--fine-n", type=int, default=80, help="quadrature subdivisions")
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def estimate(input_path, p_expected, estimator, correction, fine_n, out, fmt):
    """Estimate the dependence function on a quadrature grid from data."""
    data = empirical.read_data_csv(input_path)
    if p_expected is not None and data.shape[1] != p_expected:
        raise ValueError(f"expected {p_expected} columns, file has {data.shape[1]}")
    spec = estimators.EstimatorSpec(kind=estimator, correction=correction)
    u_hat = empirical.pseudo_observations(data)
    rule = midpoint_rule(data.shape[1], fine_n)
    surface = estimators.estimate_surface(spec, u_hat, rule)
    _write_surface(surface, spec, data.shape, out, fmt)
    click.echo(f"wrote {len(rule)}-node surface to {out}")


def _write_surface(surface, spec, shape, out, fmt):
    n, p = shape
    if fmt == "csv":
        estimators.write_surface_csv(surface, out)
        estimators.write_surface_meta(spec, n, p, str(out) + ".meta.json")
    else:
        payload = {
            "kind": spec.kind if spec else None,
            "correction": spec.correction if spec else None,
            "n": n,
            "p": p,
            "fine_n": surface.rule.n_subdiv,
            "nodes": surface.rule.nodes.tolist(),
            "values": surface.values.tolist(),
        }
        with open(out, "w") as fh:
            json.dump(payload, fh, indent=2)


@cli.command()
@click.option("--surface", "surface_path", type=click.Path(), default=None,
              help="pilot surface CSV produced by `estimate`")
@click.option("--input", "input_path", type=click.Path(), default=None,
              help="raw data CSV (used with --estimator/--correction)")
@click.option("--estimator", type=click.Choice(estimators.KINDS), default="cfg")
@click.option("--correction", type=click.Choice(estimators.CORRECTIONS), default="linear")
@click.option("--m", type=int, default=20, help="atom grid resolution")
@click.option("--fine-n", type=int, default=None, help="quadrature subdivisions (default 4m)")
@click.option("--out", type=click.Path(), required=True,
              help="output prefix: writes <out>.csv and <out>.diag.json")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def project(surface_path, input_path, estimator, correction, m, fine_n, out, fmt):
    """Project a pilot estimate onto the valid dependence-function class."""
    fine = fine_n if fine_n is not None else 4 * m
    if surface_path is None and input_path is None:
        raise click.UsageError("either --surface or --input is required")
    if surface_path is not None:
        rule, values = _read_surface_csv(surface_path)
        pilot = spectral.DependenceSurface(rule=rule, values=values)
    else:
        data = empirical.read_data_csv(input_path)
        spec = estimators.EstimatorSpec(kind=estimator, correction=correction)
        u_hat = empirical.pseudo_observations(data)
        rule = midpoint_rule(data.shape[1], fine)
        pilot = estimators.estimate_surface(spec, u_hat, rule)
    result = projection.project(pilot, m)
    if fmt == "csv":
        _write_full_measure_csv(result, str(out) + ".csv")
    else:
        spectral.write_measure_json(result.measure, str(out) + ".json")
    projection.write_diagnostics_json(
        result, m, pilot.rule.n_subdiv, str(out) + ".diag.json"
    )
    click.echo(
        f"projected onto {len(result.grid)} atoms "
        f"({int(np.count_nonzero(result.masses))} active), "
        f"distance^2 {result.objective:.3e}"
    )


def _write_full_measure_csv(result, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"v{j + 1}" for j in range(result.grid.p)] + ["mass"])
        for atom, mass in zip(result.grid.points, result.masses):
            writer.writerow([repr(float(x)) for x in atom] + [repr(float(mass))])


def _read_surface_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    p = len(rows[0]) - 1
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    nodes = data[:, :p]
    values = data[:, p]
    # reconstruct the rule resolution from the node count
    for n_subdiv in range(1, 4096):
        rule = midpoint_rule(p, n_subdiv)
        if len(rule) == nodes.shape[0]:
            if np.allclose(rule.nodes, nodes, atol=1e-9):
                return rule, values
        if len(rule) > nodes.shape[0]:
            break
    raise ValueError(f"{path} does not hold a midpoint-rule surface")


@cli.command()
@click.option("--alpha", type=float, multiple=True, required=True)
@click.option("--n", type=int, multiple=True, required=True)
@click.option("--theta", type=float, default=0.0)
@click.option("--phi", type=float, default=0.0)
@click.option("--psi", type=float, default=1.0)
@click.option("--reps", type=int, default=1000)
@click.option("--m", type=int, default=20)
@click.option("--fine-n", type=int, default=None)
@click.option("--estimators", "names", type=str, default="PD,PD-pr,CFG,CFG-pr",
              help="comma-separated subset of PD,PD-pr,CFG,CFG-pr")
@click.option("--seed", type=int, default=0)
@click.option("--workers", type=int, default=None,
              help=f"worker processes (default ${study.WORKERS_ENV} or 1)")
@click.option("--out", type=click.Path(), required=True,
              help="output prefix: writes <out>.csv and <out>.json")
def mise(alpha, n, theta, phi, psi, reps, m, fine_n, names, seed, workers, out):
    """Monte Carlo mean integrated squared error over (alpha, n) cells."""
    estimator_names = tuple(s.strip() for s in names.split(",") if s.strip())
    base = study.StudyConfig(
        params=_params_from_flags(alpha[0], theta, phi, psi),
        n=n[0],
        reps=reps,
        m=m,
        fine_n=fine_n,
        estimators=estimator_names,
        seed=seed,
    )
    table = study.run_grid(base, alphas=alpha, ns=n, workers=workers)
    table.to_csv(str(out) + ".csv")
    table.to_json(str(out) + ".json")
    click.echo(f"wrote {len(table.rows)} rows to {out}.csv")


def main(argv=None) -> int:
    """Entry point mapping exceptions onto the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        _emit_error("usage", str(exc))
        return EXIT_USAGE
    except click.exceptions.Exit as exc:  # --help and friends
        return int(exc.exit_code)
    except click.Abort:
        _emit_error("aborted", "aborted")
        return EXIT_USAGE
    except (empirical.TiesPresent, ValueError) as exc:
        _emit_error("data", str(exc), column=getattr(exc, "column", None))
        return EXIT_DATA
    except OSError as exc:
        _emit_error("io", str(exc))
        return EXIT_IO
    except (
        projection.Infeasible,
        projection.QpMaxIterations,
        np.linalg.LinAlgError,
        ArithmeticError,
    ) as exc:
        _emit_error("numerical", str(exc))
        return EXIT_NUMERICAL


def _emit_error(kind: str, message: str, **extra) -> None:
    payload = {"error": kind, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(payload), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
