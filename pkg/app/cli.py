"""Command line entry point: constants, oracle, verify, sandwich, maximal, check-conditions."""

import functools
import json
import os
import sys

import click
import pandas as pd
from pydantic import ValidationError

from app.config import config
from app.exceptions import LabError
from app.logger import logger
from app.models.run_config import RunConfig
from app.services.conditions_service import ConditionsService
from app.services.constants_service import ConstantsService
from app.services.oracle_service import OracleService
from app.services.sandbox_service import SandboxService
from app.services.verify_service import VerifyService
from app.utils.template_loader import ReportTemplate, TemplateLoader

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3
EXIT_USAGE = 64

CSV_HEADER = ["regime", "part", "value", "finite", "t_min", "t_max", "N", "seed"]


class UnknownCommand(click.UsageError):
    exit_code = EXIT_USAGE


class LabGroup(click.Group):
    def resolve_command(self, ctx, args):
        name = args[0] if args else None
        if name is not None and self.get_command(ctx, name) is None and not ctx.resilient_parsing:
            raise UnknownCommand(f"No such command '{name}'.", ctx)
        return super().resolve_command(ctx, args)


def _write_json(path: str, payload):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def lab_command(func):
    """Load the run configuration and map lab failures onto exit codes."""

    @functools.wraps(func)
    def wrapper(config_path, out, threads, seed, **kwargs):
        try:
            run = RunConfig.load(config_path)
            if seed is not None:
                run = run.model_copy(update={"seed": seed})
            os.makedirs(out, exist_ok=True)
            code = func(run, out, threads or config.THREADS, **kwargs)
        except (ValidationError, LabError, ValueError, OSError) as e:
            logger.error(f"{func.__name__}: {e}")
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INVALID)
        sys.exit(code or EXIT_OK)

    wrapper = click.option("--seed", type=int, default=None, help="Override the configured seed.")(wrapper)
    wrapper = click.option("--threads", type=int, default=None, help="Worker threads.")(wrapper)
    wrapper = click.option("--out", default="reports", show_default=True, help="Output directory.")(wrapper)
    wrapper = click.option("--config", "config_path", required=True,
                           type=click.Path(dir_okay=False), help="Run configuration (JSON).")(wrapper)
    return wrapper


@click.group(cls=LabGroup)
def cli():
    """Numerical lab for maximal operators between Lorentz spaces."""


@cli.command()
@lab_command
def constants(run: RunConfig, out: str, threads: int):
    """Characterization constants, one CSV row per (case, part)."""
    reports = ConstantsService(run, threads).run()
    rows = [row for _, report in reports for row in report.rows()]
    pd.DataFrame(rows, columns=CSV_HEADER).to_csv(os.path.join(out, "constants.csv"), index=False)
    _write_json(os.path.join(out, "constants.json"),
                [dict(report.to_dict(), case=name) for name, report in reports])
    summary = TemplateLoader().apply_template(ReportTemplate.CONSTANTS_SUMMARY, reports=reports)
    _write_text(os.path.join(out, "constants.md"), summary)
    click.echo(f"constants: {len(reports)}/{len(run.cases)} cases")
    return EXIT_OK


@cli.command()
@lab_command
def oracle(run: RunConfig, out: str, threads: int):
    """Brute-force cone lower bounds per case."""
    results = OracleService(run, threads).run()
    _write_json(os.path.join(out, "oracle.json"),
                [dict(result.to_dict(), case=name) for name, result in results])
    for name, result in results:
        click.echo(f"{name}: {result.best_ratio:.6g}")
    return EXIT_OK


@cli.command()
@lab_command
def verify(run: RunConfig, out: str, threads: int):
    """Formula totals against the oracle; exit 3 on any inconsistent verdict."""
    reports = VerifyService(run, threads).run()
    done = [r for r in reports if r is not None]
    consistent = sum(r.consistent for r in done)
    _write_json(os.path.join(out, "verify.json"), [r.to_dict() for r in done])
    summary = TemplateLoader().apply_template(
        ReportTemplate.VERIFY_SUMMARY, reports=reports, consistent=consistent, total=len(reports)
    )
    _write_text(os.path.join(out, "verify.md"), summary)
    click.echo(f"consistent: {consistent}/{len(reports)}")
    if any(r.verdict == "inconsistent" for r in done):
        return EXIT_INCONSISTENT
    return EXIT_OK


@cli.command()
@lab_command
def sandwich(run: RunConfig, out: str, threads: int):
    """(t, lhs, rhs, ratio) rows of the rearrangement sandwich per field and operator."""
    results = SandboxService(run, threads).sandwich()
    frames = [
        pd.DataFrame({"field": name, "operator": op, "t": r.t, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio})
        for name, op, r in results
    ]
    columns = ["field", "operator", "t", "lhs", "rhs", "ratio"]
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=columns)
    frame.to_csv(os.path.join(out, "sandwich.csv"), index=False)
    _write_json(os.path.join(out, "sandwich.json"), [
        {"field": name, "operator": op, "c_low": r.c_low, "C_high": r.C_high,
         "tail": r.tail, "cube_budget": r.cube_budget}
        for name, op, r in results
    ])
    for name, op, r in results:
        click.echo(f"{name}/{op}: [{r.c_low:.4g}, {r.C_high:.4g}]")
    return EXIT_OK


@cli.command()
@lab_command
def maximal(run: RunConfig, out: str, threads: int):
    """Sampled values of the maximal operator per field and operator."""
    results = SandboxService(run, threads).maximal()
    frames = []
    for name, op, sample in results:
        frame = pd.DataFrame(sample.points, columns=["x", "y"][: sample.points.shape[1]])
        frame.insert(0, "operator", op)
        frame.insert(0, "field", name)
        frame["value"] = sample.values
        frames.append(frame)
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["field", "operator", "x", "value"])
    frame.to_csv(os.path.join(out, "maximal.csv"), index=False)
    click.echo(f"maximal: {len(results)} fields sampled")
    return EXIT_OK


@cli.command("check-conditions")
@lab_command
def check_conditions(run: RunConfig, out: str, threads: int):
    """Delta_2, quasi-monotonicity, Q_r and lower-estimate checks per case."""
    results = ConditionsService(run).run()
    _write_json(os.path.join(out, "conditions.json"), [
        {"case": name, "conditions": [c.to_dict() for c in checks]} for name, checks in results
    ])
    for name, checks in results:
        failing = [c.name for c in checks if not c.verdict]
        click.echo(f"{name}: {'ok' if not failing else 'fails ' + ', '.join(failing)}")
    return EXIT_OK


def main():
    cli()


if __name__ == "__main__":
    main()
