"""Command-line entry point.

Subcommands: ground (score one query), eval (dataset run, writing the
report files and figures), ablate (eval --ablate), gen-timezone (dataset
generator), and serve (HTTP service). Exit codes: 0 success, 1 config
error, 2 backend transport failure.
"""

from __future__ import annotations

import json
import sys

import click

from .backends import TransportError
from .config import CONFIG_ENV_VAR, ConfigError, EngineConfig
from .dataset import gen_timezone_dataset, read_jsonl, write_jsonl
from .engine import execute_grounded, ground
from .evaluation import run_eval
from .reporting import grounding_table, report_table, write_report_files

_CONFIG_OPTION = click.option(
    "--config", "-c", "config_path", envvar=CONFIG_ENV_VAR,
    help=f"Engine config JSON (or ${CONFIG_ENV_VAR}).",
)


@click.group()
def cli() -> None:
    """Query-tool grounding engine."""


def _components(config_path, library, mock_all):
    config = EngineConfig.load(config_path)
    return config.build(
        library_override=library,
        mock_all_override=True if mock_all else None,
    )


@cli.command("ground")
@click.option("--query", "-q", required=True)
@_CONFIG_OPTION
@click.option("--library", default=None, help="Override the config's tool library.")
@click.option("--json", "as_json", is_flag=True, help="Machine-parseable output.")
@click.option("--execute", is_flag=True, help="Also run the selected tool for a final answer.")
@click.option("--mock-all", is_flag=True, help="Force mock mode for every tool (offline demo).")
def cmd_ground(query, config_path, library, as_json, execute, mock_all) -> None:
    """Score every tool for QUERY and print the selection."""
    parts = _components(config_path, library, mock_all)
    result = ground(
        query, parts.registry, parts.slm, parts.embedder,
        parts.patterns, parts.priors, parts.score,
        mock_all=parts.mock_all, max_concurrency=parts.max_concurrency,
    )
    if execute:
        result = execute_grounded(query, result, parts.llm, parts.registry)
    if as_json:
        click.echo(json.dumps(result.to_dict(), ensure_ascii=False))
    else:
        click.echo(grounding_table(result))


@cli.command("eval")
@click.option("--dataset", required=True)
@_CONFIG_OPTION
@click.option("--library", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for report.json/.txt, confusion.csv, and figures.")
@click.option("--ablate", is_flag=True, help="Add the leave-one-out gamma variants.")
@click.option("--execute", is_flag=True, help="Execute the selected tool per record.")
@click.option("--json", "as_json", is_flag=True)
@click.option("--mock-all", is_flag=True)
def cmd_eval(dataset, config_path, library, out, ablate, execute, as_json, mock_all) -> None:
    """Evaluate grounding accuracy over a JSONL dataset."""
    parts = _components(config_path, library, mock_all)
    try:
        records = read_jsonl(dataset)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset: {exc}") from exc
    _, report = run_eval(
        records, parts.registry, parts.slm, parts.embedder,
        parts.patterns, parts.priors, parts.score,
        llm=parts.llm, execute=execute,
        mock_all=parts.mock_all, max_concurrency=parts.max_concurrency,
        ablate=ablate,
    )
    if out:
        for path in write_report_files(report, out):
            click.echo(f"wrote {path}", err=True)
    if as_json:
        click.echo(json.dumps(report.to_dict(), ensure_ascii=False))
    else:
        click.echo(report_table(report))


@cli.command("ablate")
@click.option("--dataset", required=True)
@_CONFIG_OPTION
@click.option("--library", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
@click.option("--mock-all", is_flag=True)
@click.pass_context
def cmd_ablate(ctx, dataset, config_path, library, out, as_json, mock_all) -> None:
    """Shorthand for eval --ablate."""
    ctx.invoke(
        cmd_eval, dataset=dataset, config_path=config_path, library=library,
        out=out, ablate=True, execute=False, as_json=as_json, mock_all=mock_all,
    )


@cli.command("gen-timezone")
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="JSONL output path (default: stdout).")
def cmd_gen_timezone(n, seed, out) -> None:
    """Generate the timezone-conversion dataset."""
    records = gen_timezone_dataset(n, seed)
    if out:
        write_jsonl(records, out)
        click.echo(f"wrote {len(records)} records to {out}", err=True)
    else:
        for record in records:
            click.echo(json.dumps(record.to_dict(), ensure_ascii=False))


@cli.command("serve")
@_CONFIG_OPTION
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def cmd_serve(config_path, port, host) -> None:
    """Run the grounding/chat HTTP service."""
    import uvicorn

    from .service import create_app

    parts = EngineConfig.load(config_path).build()
    uvicorn.run(create_app(parts), host=host, port=port)


def main() -> None:
    try:
        cli(standalone_mode=False)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except TransportError as exc:
        click.echo(f"backend transport failure: {exc}", err=True)
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(130)


if __name__ == "__main__":
    main()
