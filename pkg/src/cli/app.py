import argparse
import sys
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

from services.automorphism_service import AutomorphismService
from services.cohomology_service import CohomologyService
from services.completion_service import CompletionService
from services.derivation_service import DerivationService
from services.expression_service import ExpressionService
from services.gamma_service import GammaLattice
from services.lie_service import BracketRule, LieService, Window
from services.linalg_service import LinearAlgebraService
from services.serialization_service import SerializationService
from services.storage_service import StorageService
from services.structure_service import StructureService
from shared.config import Config, GammaConfig
from shared.exceptions import InputError, VerificationError, WittkitError
from shared.utils import Logger, ReportFormatter

logger = Logger.setup_logger(__name__)

OK = 'ok'
FAILED = 'verification_failed'

Outcome = Tuple[str, Dict[str, Any]]


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors become input-error reports instead of exiting"""

    def error(self, message):
        raise InputError(message)


@dataclass
class Services:
    gamma: GammaConfig
    lattice: GammaLattice
    lie: LieService
    linalg: LinearAlgebraService
    completion: CompletionService
    structure: StructureService
    derivations: DerivationService
    automorphisms: AutomorphismService
    cohomology: CohomologyService
    expressions: ExpressionService
    codec: SerializationService


def build_services(gamma: GammaConfig, config: Config) -> Services:
    lattice = GammaLattice(gamma)
    lie = LieService(lattice)
    linalg = LinearAlgebraService(lattice.scalars)
    completion = CompletionService(lattice)
    expressions = ExpressionService(lie)
    return Services(
        gamma=gamma,
        lattice=lattice,
        lie=lie,
        linalg=linalg,
        completion=completion,
        structure=StructureService(lie, linalg, level_slack=config.LEVEL_SLACK),
        derivations=DerivationService(lie, completion, linalg, order_padding=config.ORDER_PADDING),
        automorphisms=AutomorphismService(lie),
        cohomology=CohomologyService(lie, c_checks=config.C_CHECKS),
        expressions=expressions,
        codec=SerializationService(lie, expressions),
    )


# -- commands ---------------------------------------------------------------------------------

def _window(args) -> Window:
    return Window(*args.window)


def _status(ok: bool) -> str:
    return OK if ok else FAILED


def cmd_eval(s: Services, args, storage: StorageService) -> Outcome:
    rule = BracketRule.parse(args.rule)
    ast = s.expressions.parse(args.expr)
    value = s.expressions.evaluate(ast, rule)
    return OK, {'input': s.expressions.format_ast(ast), 'rule': str(rule), 'element': s.codec.element_to_json(value)}


def cmd_jacobi(s: Services, args, storage: StorageService) -> Outcome:
    rule = BracketRule.parse(args.rule)
    summary = s.lie.jacobi_sweep(_window(args), rule)
    return _status(summary.is_zero), {'rule': str(rule), 'window': s.codec.window_to_json(_window(args)),
                                      'residual': s.codec.residual_to_json(summary)}


def cmd_ideal(s: Services, args, storage: StorageService) -> Outcome:
    report = s.structure.ideal_generated(s.expressions.eval_text(args.gen), _window(args))
    replayed = s.structure.replay_chain(report.generator, report.witness_chain)
    result = s.codec.ideal_report_to_json(report)
    result['replayed'] = s.expressions.format_element(replayed)
    return _status(report.certified), result


def cmd_adprobe(s: Services, args, storage: StorageService) -> Outcome:
    rule = BracketRule.parse(args.rule)
    x, y = s.expressions.eval_text(args.x, rule), s.expressions.eval_text(args.y, rule)
    probe = s.structure.ad_probe(x, y, args.steps, rule)
    predictions_hold = all(entry['matches'] for entry in probe.highest_terms if entry)
    result = s.codec.probe_to_json(probe)
    result['rule'] = str(rule)
    return _status(predictions_hold), result


def cmd_derive(s: Services, args, storage: StorageService) -> Outcome:
    D = s.codec.derivation_from_json(storage.load_document(args.input))
    window = _window(args)
    if args.action == 'check':
        summary = s.derivations.leibniz_check(D, window)
        return _status(summary.is_zero), {'leibniz': s.codec.residual_to_json(summary)}
    result = s.derivations.decompose_derivation(D, window, args.order)
    return _status(result.residual.is_zero), s.codec.decomposition_to_json(result)


def cmd_aut(s: Services, args, storage: StorageService) -> Outcome:
    document = storage.load_document(args.input)
    auts = s.automorphisms

    def aut(key: str):
        return s.codec.aut_from_json(document.get(key, document), auts)

    if args.action == 'apply':
        if 'x' not in document:
            raise InputError("aut apply needs an element under \"x\"")
        image = auts.aut_apply(aut('aut'), s.codec.element_from_json(document['x']))
        return OK, {'image': s.codec.element_to_json(image)}
    if args.action == 'compose':
        if 'a1' not in document or 'a2' not in document:
            raise InputError("aut compose needs \"a1\" and \"a2\"")
        return OK, {'composite': s.codec.aut_to_json(auts.aut_compose(aut('a1'), aut('a2')))}
    if args.action == 'invert':
        a = aut('aut')
        inverse = auts.aut_invert(a)
        identity = auts.is_identity(auts.aut_compose(a, inverse))
        return _status(identity), {'inverse': s.codec.aut_to_json(inverse), 'composes_to_identity': identity}
    summary = auts.aut_verify(aut('aut'), _window(args))
    return _status(summary.is_zero), {'residual': s.codec.residual_to_json(summary)}


def cmd_cocycle(s: Services, args, storage: StorageService) -> Outcome:
    psi = s.codec.cocycle_from_json(storage.load_document(args.input))
    window = _window(args)
    if args.action == 'check':
        summary = s.cohomology.cocycle_condition_check(psi, window)
        return _status(summary.is_zero), {'residual': s.codec.residual_to_json(summary)}
    if args.action == 'normalize':
        result = s.cohomology.normalize_cocycle(psi, window)
        return _status(result.success), s.codec.normalization_to_json(result)
    fit = s.cohomology.coboundary_fit(psi, window)
    result = s.codec.fit_to_json(fit)
    ok = True
    if args.expect:
        result['expected'] = args.expect
        ok = fit.feasible == (args.expect == 'feasible')
    return _status(ok), result


def cmd_span(s: Services, args, storage: StorageService) -> Outcome:
    holds = s.structure.nested_bracket_span_check(args.n, args.m, _window(args))
    return _status(holds), {'n': args.n, 'm': args.m, 'window': s.codec.window_to_json(_window(args)),
                            'holds': holds}


def cmd_theta(s: Services, args, storage: StorageService) -> Outcome:
    beta = s.expressions.parse_degree(args.beta)
    gamma = s.expressions.parse_degree(args.theta_gamma)
    image = s.structure.theta_apply(beta, gamma, s.expressions.eval_text(args.x))
    return OK, {'beta': s.codec.degree_to_json(beta), 'gamma': s.codec.degree_to_json(gamma),
                'image': s.codec.element_to_json(image)}


def cmd_subquotient(s: Services, args, storage: StorageService) -> Outcome:
    report = s.structure.inspect_subquotient(args.m, args.n, _window(args))
    ok = report['finitely_graded'] and report['closed'] and report['jacobi'].is_zero
    if 'virasoro' in report:
        ok = ok and report['virasoro'].is_zero
    return _status(ok), s.codec.plain(report)


COMMANDS: Dict[str, Callable[[Services, argparse.Namespace, StorageService], Outcome]] = {
    'eval': cmd_eval,
    'jacobi': cmd_jacobi,
    'ideal': cmd_ideal,
    'adprobe': cmd_adprobe,
    'derive': cmd_derive,
    'aut': cmd_aut,
    'cocycle': cmd_cocycle,
    'span': cmd_span,
    'theta': cmd_theta,
    'subquotient': cmd_subquotient,
}


# -- parser -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog='wittkit', description="Exact computations in the Lie algebra W(Γ)")
    parser.add_argument('--gamma', help="Γ document (defaults to $WITTKIT_GAMMA)")
    parser.add_argument('--output', help="write the report to this file instead of stdout")
    parser.add_argument('--log-level', help="override $WITTKIT_LOG_LEVEL")
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    def window(sub, default=(3, 3)):
        sub.add_argument('--window', nargs=2, type=int, metavar=('A', 'I'), default=list(default))

    def rule(sub):
        sub.add_argument('--rule', default='wgamma', help="wgamma, wgammahat, witt or subquotient:M,N")

    sub = commands.add_parser('eval', help="evaluate an expression")
    sub.add_argument('expr')
    rule(sub)

    sub = commands.add_parser('jacobi', help="Jacobi identity on a window")
    window(sub)
    rule(sub)

    sub = commands.add_parser('ideal', help="classify the ideal generated by an element")
    sub.add_argument('--gen', required=True)
    window(sub)

    sub = commands.add_parser('adprobe', help="growth of ad_x^k y")
    sub.add_argument('--x', required=True)
    sub.add_argument('--y', required=True)
    sub.add_argument('--steps', type=int, default=8)
    rule(sub)

    sub = commands.add_parser('derive', help="derivations: Leibniz check or decomposition")
    sub.add_argument('action', choices=['check', 'decompose'])
    sub.add_argument('--input', required=True)
    sub.add_argument('--order', type=int)
    window(sub, (2, 2))

    sub = commands.add_parser('aut', help="automorphisms φ_{τ,c}")
    sub.add_argument('action', choices=['apply', 'compose', 'verify', 'invert'])
    sub.add_argument('--input', required=True)
    window(sub)

    sub = commands.add_parser('cocycle', help="2-cocycles: check, normalize or fit")
    sub.add_argument('action', choices=['check', 'normalize', 'fit'])
    sub.add_argument('--input', required=True)
    sub.add_argument('--expect', choices=['feasible', 'infeasible'])
    window(sub, (3, 2))

    sub = commands.add_parser('span', help="nested bracket span W^n = ad^m_{W¹}(W^{n−m})")
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--m', type=int, required=True)
    window(sub, (3, 6))

    sub = commands.add_parser('theta', help="apply θ_β with parameter γ")
    sub.add_argument('--beta', required=True)
    sub.add_argument('--gamma', dest='theta_gamma', required=True)
    sub.add_argument('--x', required=True)

    sub = commands.add_parser('subquotient', help="inspect W^m / W^{n+1}")
    sub.add_argument('--m', type=int, required=True)
    sub.add_argument('--n', type=int, required=True)
    window(sub)
    return parser


# -- entry point ------------------------------------------------------------------------------

def run(argv: List[str], config: Optional[Config] = None,
        storage: Optional[StorageService] = None) -> Tuple[Dict[str, Any], Optional[str]]:
    """Parse and dispatch; returns the report and the requested output path. Never raises for wittkit errors"""
    storage = storage or StorageService()
    command = ' '.join(argv)
    fingerprint = None
    output = None
    try:
        config = config or Config()
        args = build_parser().parse_args(argv)
        output = args.output
        Logger.configure(args.log_level or config.LOG_LEVEL, config.LOG_FORMAT)
        gamma = storage.load_gamma(config.require_gamma_path(args.gamma))
        fingerprint = gamma.fingerprint
        services = build_services(gamma, config)
        Logger.log_processing_step(logger, "Running command", {'command': args.command, 'gamma': fingerprint})
        started = time.perf_counter()
        status, result = COMMANDS[args.command](services, args, storage)
        report = ReportFormatter.success_report(command, fingerprint, result, status,
                                                round(time.perf_counter() - started, 6))
        if status == OK:
            Logger.log_success(logger, "Command finished", {'command': args.command})
        else:
            logger.warning("Verification failed", command=args.command)
        return report, output
    except InputError as e:
        Logger.log_error(logger, "Input error", e)
        return ReportFormatter.error_report(command, e, fingerprint, 'input_error'), output
    except VerificationError as e:
        Logger.log_error(logger, "Verification error", e)
        return ReportFormatter.error_report(command, e, fingerprint, FAILED), output
    except WittkitError as e:
        Logger.log_error(logger, "Computation error", e)
        return ReportFormatter.error_report(command, e, fingerprint, 'input_error'), output


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    storage = StorageService()
    report, output = run(argv, storage=storage)
    try:
        text = storage.save_report(report, output)
    except InputError as e:
        report = ReportFormatter.error_report(' '.join(argv), e, report.get('gamma'), 'input_error')
        text = storage.save_report(report)
        output = None
    if output is None:
        sys.stdout.write(text)
    return ReportFormatter.exit_code(report)


if __name__ == '__main__':
    sys.exit(main())
