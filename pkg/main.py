"""
Main entry point for the temporal action theory reasoner.

    python main.py check samples/traffic.tbat
    python main.py compile samples/traffic.tbat --appendix
    python main.py query samples/traffic.tbat -n "switch(I)@1; switch(I)@2" "que(I,in1,3) < 95" --trace
    python main.py diagnose samples/traffic.tbat -n "switch(I)@1; switch(I)@2" "que(I,in1,t) < 95"
    python main.py ha invariance samples/bounce.ha -n "trans(fall,fall,0,5)@1" --tau 3/2

Exit codes: 0 success or true, 1 domain failure or false, 2 usage or I/O error.
"""

import json
import logging
import sys
from fractions import Fraction
from functools import wraps
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

import click

from config import Config
from exceptions import ReasonerError
from logic.formulas import Iff, disj
from logic.render import render
from models.reports import DiagnosisStatus
from models.theory import Diagnostic, error, has_errors
from parsing.printer import format_init_ssa, format_sea
from services.reasoning_service import ReasoningService
from services.regression_engine import trace_records
from services.sea_compiler import appendix_axioms
from utils.cache import format_rational

logger = logging.getLogger("main")


class RationalType(click.ParamType):
    """Exact rational from `p/q`, an integer or a decimal literal"""
    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational number", param, ctx)


RATIONAL = RationalType()


class Output:
    """Writes human text or line-delimited JSON records with sorted keys"""

    def __init__(self, fmt: str):
        self.structured = fmt == "structured"

    def record(self, record: dict) -> None:
        click.echo(json.dumps(record, sort_keys=True, ensure_ascii=False))

    def text(self, line: str = "") -> None:
        click.echo(line)

    def emit(self, record: dict, line: str) -> None:
        if self.structured:
            self.record(record)
        else:
            self.text(line)

    def diagnostics(self, diagnostics) -> None:
        for diagnostic in diagnostics:
            self.emit(diagnostic.to_record(), str(diagnostic))


def configure_logging(verbosity: int) -> None:
    level = Config.LOG_LEVEL
    if verbosity == 1:
        level = "INFO"
    elif verbosity >= 2:
        level = "DEBUG"
    logging.basicConfig(level=level, format=Config.LOG_FORMAT, stream=sys.stderr)


def reasoner_command(func):
    """Map reasoner and I/O errors to diagnostics and exit codes"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        out: Output = ctx.obj["output"]
        try:
            code = func(*args, **kwargs)
        except OSError as exc:
            out.emit(error("io", str(exc)).to_record(), f"error io: {exc}")
            ctx.exit(Config.EXIT_USAGE)
        except ReasonerError as exc:
            code_name = getattr(exc, "code", None) or type(exc).__name__
            found = error(code_name, str(exc), witness=getattr(exc, "witness", None))
            out.emit(found.to_record(), str(found))
            ctx.exit(Config.EXIT_FAILURE)
        ctx.exit(code or Config.EXIT_OK)
    return wrapper


@click.group()
@click.option("--format", "fmt", type=click.Choice(Config.OUTPUT_FORMATS), default=Config.default_format,
              show_default="human (env TBAT_FORMAT)", help="Output format")
@click.option("-v", "--verbose", count=True, help="-v for info logging, -vv for debug")
@click.pass_context
def cli(ctx, fmt, verbose):
    """Reasoning about temporal action theories and hybrid automata."""
    configure_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["output"] = Output(fmt)
    ctx.obj["service"] = ReasoningService()


def _theory_path():
    return click.argument("theory", type=click.Path(dir_okay=False))


def _narrative_option():
    return click.option("-n", "--narrative", default="", help="Narrative `A(args)@t; ...`; empty for S0")


# ==== THEORIES ====

@cli.command()
@_theory_path()
@click.pass_obj
@reasoner_command
def check(obj, theory):
    """Parse, validate and consistency-check a theory."""
    out: Output = obj["output"]
    diagnostics = obj["service"].check(obj["service"].load_theory(theory))
    out.diagnostics(diagnostics)
    failed = has_errors(diagnostics)
    if not out.structured:
        errors = sum(d.is_error for d in diagnostics)
        out.text(f"{theory}: {errors} errors, {len(diagnostics) - errors} warnings")
    return Config.EXIT_FAILURE if failed else Config.EXIT_OK


@cli.command("compile")
@_theory_path()
@click.option("--appendix", is_flag=True, help="Also print the intermediate axioms of every temporal fluent")
@click.pass_obj
@reasoner_command
def compile_theory_command(obj, theory, appendix):
    """Print the derived state evolution axioms and init-SSAs."""
    out: Output = obj["output"]
    service: ReasoningService = obj["service"]
    compiled, diagnostics = service.compile(service.load_theory(theory))
    if has_errors(diagnostics):
        out.diagnostics(diagnostics)
        return Config.EXIT_FAILURE
    out.diagnostics(diagnostics)

    for name, sea in compiled.seas.items():
        axiom = Iff(sea.head(), disj(*sea.branch_formulas()))
        out.emit({"kind": "sea", "fluent": name, "branches": len(sea.branch_formulas()),
                  "axiom": render(axiom)},
                 f"// state evolution axiom for {name}\n{format_sea(sea)};\n")
    for name, init_ssa in compiled.init_ssas.items():
        ssa = init_ssa.as_successor_state_axiom()
        out.emit({"kind": "init-ssa", "fluent": name, "axiom": render(Iff(ssa.head(), ssa.body))},
                 f"// successor state axiom for {name}\n{format_init_ssa(init_ssa)};\n")
    if appendix:
        for fluent in compiled.temporal_fluents:
            for label, formula in appendix_axioms(compiled, fluent):
                out.emit({"kind": "appendix", "fluent": fluent, "name": label, "axiom": render(formula)},
                         f"// {label} for {fluent}\n{render(formula)};\n")
    return Config.EXIT_OK


# ==== QUERIES ====

@cli.command()
@_theory_path()
@click.argument("query", required=False)
@_narrative_option()
@click.option("--trace", is_flag=True, help="Show every regression step")
@click.option("--stop-at", type=click.IntRange(min=0), default=None,
              help="Regress only down to the prefix with this many actions")
@click.option("--no-resolve", is_flag=True, help="Keep statics and S0 atoms symbolic in the regressed formula")
@click.option("--batch", "batch_file", type=click.Path(dir_okay=False), default=None,
              help="File of `narrative | query` lines")
@click.option("--jobs", type=click.IntRange(min=1), default=Config.DEFAULT_JOBS, show_default=True,
              help="Worker threads for --batch")
@click.pass_obj
@reasoner_command
def query(obj, theory, query, narrative, trace, stop_at, no_resolve, batch_file, jobs):
    """Regress QUERY about the narrative and evaluate it."""
    out: Output = obj["output"]
    service: ReasoningService = obj["service"]
    loaded = service.load_theory(theory)

    if batch_file is not None:
        lines = Path(batch_file).read_text(encoding="utf-8").splitlines()
        records = service.batch(loaded, lines, jobs)
        for record in records:
            if record["kind"] == "verdict":
                line = f"{record['line']}: {'true' if record['value'] else 'false'}  {record['query']}"
                line += "".join(f"\n  warning {found['code']}: {found['message']}" for found in record["diagnostics"])
            else:
                line = f"{record['line']}: error {record['code']}: {record['message']}"
            out.emit(record, line)
        return Config.EXIT_FAILURE if any(r["kind"] != "verdict" for r in records) else Config.EXIT_OK

    if not query:
        raise click.UsageError("QUERY is required unless --batch is given")
    outcome = service.query(loaded, narrative, query, stop_at, resolve_initial=not no_resolve)
    out.diagnostics(outcome.diagnostics)
    if trace:
        for record in trace_records(outcome.result):
            out.emit(record, f"{record['step']:>3} {record['rule']:<15} {record['after']}")
    verdict = outcome.verdict
    if out.structured:
        out.record(verdict.to_record())
    else:
        out.text(f"regressed: {render(verdict.regressed)}")
        out.text("true" if verdict.value else "false")
    return Config.EXIT_OK if verdict.value else Config.EXIT_FAILURE


@cli.command()
@_theory_path()
@click.argument("query")
@_narrative_option()
@click.option("--horizon", type=RATIONAL, default=None, help="Last instant considered; default start of the narrative")
@click.pass_obj
@reasoner_command
def diagnose(obj, theory, query, narrative, horizon):
    """Find the action responsible for QUERY (free time variable t) holding at the end."""
    out: Output = obj["output"]
    service: ReasoningService = obj["service"]
    report = service.diagnose(service.load_theory(theory), narrative, query, horizon)
    if out.structured:
        for prefix in report.prefixes:
            out.record(prefix.to_record())
        out.record(report.to_record())
    else:
        for prefix in report.prefixes:
            out.text(f"prefix {prefix.index} [{format_rational(prefix.start)}, {format_rational(prefix.end)}]: "
                     f"holds on {prefix.holds}")
        suffix = "" if report.attained or report.elapsed is None else " (infimum, not attained)"
        out.text(report.summary + suffix)
    found = report.status in (DiagnosisStatus.ATTRIBUTED, DiagnosisStatus.INITIALLY_TRUE)
    return Config.EXIT_OK if found else Config.EXIT_FAILURE


# ==== HYBRID AUTOMATA ====

@cli.group()
def ha():
    """Hybrid automata: translation, trajectories and invariance."""


@ha.command()
@click.argument("automaton", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write the theory to a file")
@click.pass_obj
@reasoner_command
def translate(obj, automaton, output):
    """Translate AUTOMATON into a .tbat theory."""
    out: Output = obj["output"]
    service: ReasoningService = obj["service"]
    text = service.translate(service.load_automaton(automaton))
    if output is not None:
        Path(output).write_text(text + "\n", encoding="utf-8")
        out.emit({"kind": "translation", "output": output}, f"wrote {output}")
    elif out.structured:
        out.record({"kind": "translation", "theory": text})
    else:
        out.text(text)
    return Config.EXIT_OK


def _check_line(check_result) -> str:
    if check_result.ok:
        return "ok"
    where = f" at {check_result.instant}" if check_result.instant is not None else ""
    return f"violated ({check_result.condition}) element {check_result.index}{where}: {check_result.message}"


@ha.command()
@click.argument("automaton", type=click.Path(dir_okay=False))
@_narrative_option()
@click.option("--tau", type=RATIONAL, required=True, help="End of the last element")
@click.pass_obj
@reasoner_command
def trace(obj, automaton, narrative, tau):
    """List the trajectory a narrative induces and check it against AUTOMATON."""
    out: Output = obj["output"]
    service: ReasoningService = obj["service"]
    loaded = service.load_automaton(automaton)
    trajectory, result = service.trajectory(loaded, narrative, tau)
    for index, element in enumerate(trajectory.elements):
        record = element.to_record(index, loaded.variables)
        start = ", ".join(f"{name}={value}" for name, value in record["start"].items())
        out.emit(record, f"{index}: {element.mode} for {record['duration']} from ({start})")
    out.emit(result.to_record(), _check_line(result))
    return Config.EXIT_OK if result.ok else Config.EXIT_FAILURE


@ha.command()
@click.argument("automaton", type=click.Path(dir_okay=False))
@_narrative_option()
@click.option("--tau", type=RATIONAL, required=True, help="End of the final segment")
@click.pass_obj
@reasoner_command
def invariance(obj, automaton, narrative, tau):
    """Check Init at S0 and Inv along every segment of the narrative in the translated theory."""
    out: Output = obj["output"]
    service: ReasoningService = obj["service"]
    result = service.invariance(service.load_automaton(automaton), narrative, tau)
    out.emit(result.to_record(), _check_line(result))
    return Config.EXIT_OK if result.ok else Config.EXIT_FAILURE


def main():
    """
    Main application entry point.
    """
    cli(obj={})


if __name__ == "__main__":
    main()
