"""
Run Manager for the command line
One method per verb: runs the library operation, writes its artifacts and returns a RunRecord
"""

import os
from enum import IntEnum
from fractions import Fraction

from config import config
from elections import (
    CommitteeSpace,
    DeviationFunction,
    Quota,
    VoteDistribution,
    parse_committee,
    profile_to_distribution,
    ApprovalProfile,
    worst_deviation,
)
from elections.random_instances import make_rng, random_deviation_function
from elections.rationals import format_fraction, fraction_to_pair
from errors import CertificateViolation, IntegrityError, ParameterError
from logging_config import get_logger
from programs import (
    CounterexampleStatus,
    DualCertificate,
    InfeasibilityCertificate,
    PriceabilityStatus,
    PriceKind,
    assignment_values,
    build_milp,
    certificate_kplusone,
    certificate_singleton,
    check_milp_assignment,
    check_priceability,
    extract_deviation_function,
    lower_bound_assignment,
    render_proof,
    search_counterexample,
    solve_search,
    verify_certificate,
    verify_solution,
)
from save_load import RunRecord, read_json, save_record, write_json
from solvers import BackendConfig, SolveStatus, write_model

logger = get_logger(__name__)


class ExitCode(IntEnum):
    OK = 0
    PROPERTY_FAILS = 1
    UNDECIDED = 2
    PARAMETER_ERROR = 3
    TIME_LIMIT = 4
    BACKEND_ERROR = 5


def reference_value(k, quota):
    """-1/(k(k+1)) for Hare, 0 for Droop"""
    return Fraction(-1, k * (k + 1)) if quota is Quota.HARE else Fraction(0)


def load_instance(path):
    """
    Read a vote distribution, or an approval profile converted to one.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ParameterError: If it holds neither format
    """
    data = read_json(path)
    if isinstance(data, dict) and "ballots" in data:
        return profile_to_distribution(ApprovalProfile.from_dict(data))
    return VoteDistribution.from_dict(data)


class RunManager:
    """Executes CLI verbs and persists their records"""

    def __init__(self, output_dir=None, backend=None):
        """
        Args:
            output_dir (str, optional): Directory for records and artifacts; config.OUTPUT_DIR by default
            backend (BackendConfig, optional): Solver settings; environment settings by default
        """
        self.output_dir = output_dir or config.OUTPUT_DIR
        self.backend = backend or BackendConfig.from_config()

    def _record(self, command, **parameters):
        return RunRecord(command, parameters=parameters, backend=self.backend.to_dict())

    def _artifact(self, record, name, data, filename):
        path = write_json(data, os.path.join(self.output_dir, filename))
        record.add_artifact(name, path)
        logger.info(f"Wrote {name} to {path}")
        return path

    def _finish(self, record, exit_code):
        record.finish(int(exit_code))
        path = save_record(record, output_dir=self.output_dir)
        logger.info(f"{record.command} finished with exit code {record.exit_code}; record at {path}")
        return record

    def record_failure(self, command, parameters, error, exit_code):
        """Persist a run that stopped on an error before producing a result"""
        record = self._record(command, **parameters)
        record.result = {"error": str(error), "error_type": type(error).__name__}
        return self._finish(record, exit_code)

    # ============================================================================
    # SEARCH
    # ============================================================================

    def search(self, m, k, quota=Quota.HARE, export_lp=False, export_mps=False, warm_start=False,
               max_deviation_size=None):
        """
        Build, solve and verify the search program for (m, k).

        Returns:
            RunRecord: exit 0 on a verified optimum, 4 on a time limit, 5 on solver or integrity errors
        """
        record = self._record("search", m=m, k=k, quota=quota.label, warm_start=warm_start,
                              max_deviation_size=max_deviation_size)
        stem = f"search_m{m}_k{k}_{quota.label}"
        model = build_milp(m, k, quota, max_deviation_size=max_deviation_size)
        record.result["model"] = model.summary()
        self._export(record, model, stem, export_lp, export_mps)

        start = None
        if warm_start:
            space = CommitteeSpace(m, k)
            lba = lower_bound_assignment(m, k, quota)
            start = {name: float(value) for name, value in
                     assignment_values(space, lba.distribution, lba.deviations, lba.mu, max_deviation_size).items()}

        solution = solve_search(model, self.backend, start)
        record.result["solution"] = solution.to_dict()
        record.result["reference_value"] = fraction_to_pair(reference_value(k, quota))

        if solution.status is SolveStatus.ERROR:
            return self._finish(record, ExitCode.BACKEND_ERROR)
        if solution.status not in (SolveStatus.OPTIMAL, SolveStatus.TIME_LIMIT):
            record.result["error"] = f"search program ended {solution.status.value}"
            return self._finish(record, ExitCode.BACKEND_ERROR)

        if solution.has_solution:
            check = verify_solution(solution)
            record.result["verification"] = check.to_dict()
            if check.distribution is not None:
                self._artifact(record, "distribution", check.distribution.to_dict(), f"{stem}_distribution.json")
            try:
                deviations = extract_deviation_function(solution)
                self._artifact(record, "deviations", deviations.to_dict(), f"{stem}_deviations.json")
            except IntegrityError as exc:
                record.result["error"] = str(exc)
                return self._finish(record, ExitCode.BACKEND_ERROR)
            if solution.status is SolveStatus.OPTIMAL and not check.verified:
                return self._finish(record, ExitCode.BACKEND_ERROR)

        if solution.status is SolveStatus.TIME_LIMIT:
            return self._finish(record, ExitCode.TIME_LIMIT)
        return self._finish(record, ExitCode.OK)

    def _export(self, record, model, stem, export_lp, export_mps):
        for enabled, fmt in ((export_lp, "lp"), (export_mps, "mps")):
            if enabled:
                path = write_model(model, os.path.join(self.output_dir, f"{stem}.{fmt}"), fmt)
                record.add_artifact(f"model_{fmt}", path)

    def table(self, max_m, quota=Quota.HARE, min_m=2):
        """
        Search every 1 <= k < m <= max_m and tabulate the optimum next to the reference value.

        Returns:
            RunRecord: exit 0 when every row matches within tolerance, 1 on a mismatch, 4/5 on solver trouble
        """
        if max_m < 2:
            raise ParameterError(f"table needs max_m >= 2, got {max_m}")
        record = self._record("table", min_m=min_m, max_m=max_m, quota=quota.label)
        rows = []
        exit_code = ExitCode.OK
        for m in range(max(min_m, 2), max_m + 1):
            for k in range(1, m):
                solution = solve_search(build_milp(m, k, quota), self.backend)
                expected = reference_value(k, quota)
                row = {"m": m, "k": k, "status": solution.status.value, "mu": solution.mu,
                       "bound": solution.bound, "reference": format_fraction(expected)}
                if solution.status is SolveStatus.OPTIMAL:
                    row["matches"] = abs(solution.mu - float(expected)) <= self.backend.tolerance
                    if not row["matches"]:
                        exit_code = max(exit_code, ExitCode.PROPERTY_FAILS)
                elif solution.status is SolveStatus.TIME_LIMIT:
                    exit_code = max(exit_code, ExitCode.TIME_LIMIT)
                else:
                    exit_code = max(exit_code, ExitCode.BACKEND_ERROR)
                rows.append(row)
        record.result["rows"] = rows
        return self._finish(record, exit_code)

    # ============================================================================
    # CHECK
    # ============================================================================

    def check(self, instance_path, committee_text, k=None, quota=Quota.HARE):
        """
        Exact stability verdict of one committee.

        Returns:
            RunRecord: exit 0 when stable, 1 when some deviation breaks it
        """
        x = load_instance(instance_path)
        committee = parse_committee(committee_text, x.m)
        k = len(committee) if k is None else k
        record = self._record("check", instance=str(instance_path), committee=committee.to_list(), k=k,
                              quota=quota.label)
        deviation, excess = worst_deviation(x, committee, k, quota)
        stable = quota.admits(excess)
        record.result = {
            "stable": stable,
            "committee": committee.label(),
            "worst_deviation": deviation.to_list(),
            "worst_deviation_label": deviation.label(),
            "excess": fraction_to_pair(excess),
            "excess_text": format_fraction(excess),
        }
        return self._finish(record, ExitCode.OK if stable else ExitCode.PROPERTY_FAILS)

    # ============================================================================
    # CERTIFY
    # ============================================================================

    def certify(self, m, k, quota=Quota.HARE, mode="lower-bound", deviations_path=None,
                certificate_path=None, seed=None, warm_start=False):
        """
        Emit or verify constructive certificates.

        Modes: lower-bound (exact feasible point of the search program), singleton and
        kplusone (dual certificates for a deviation function read from file or drawn
        with the seed), verify (check a certificate file against a deviation function).

        Returns:
            RunRecord: exit 0 when everything verified, 1 on a violation
        """
        record = self._record("certify", m=m, k=k, quota=quota.label, mode=mode,
                              deviations=deviations_path, certificate=certificate_path, seed=seed)
        stem = f"certify_{mode}_m{m}_k{k}_{quota.label}"
        space = CommitteeSpace(m, k)

        if mode == "lower-bound":
            lba = lower_bound_assignment(m, k, quota)
            violations = check_milp_assignment(space, quota, lba.distribution, lba.deviations, lba.mu)
            record.result = {"mu": fraction_to_pair(lba.mu), "mu_text": format_fraction(lba.mu),
                             "violations": violations}
            self._artifact(record, "distribution", lba.distribution.to_dict(), f"{stem}_distribution.json")
            self._artifact(record, "deviations", lba.deviations.to_dict(), f"{stem}_deviations.json")
            if warm_start:
                start = {name: float(v) for name, v in
                         assignment_values(space, lba.distribution, lba.deviations, lba.mu).items()}
                solution = solve_search(build_milp(m, k, quota), self.backend, start)
                record.result["solution"] = solution.to_dict()
            return self._finish(record, ExitCode.PROPERTY_FAILS if violations else ExitCode.OK)

        if mode in ("singleton", "kplusone"):
            deviations = self._deviations(space, deviations_path, seed, singleton=mode == "singleton")
            if mode == "singleton":
                cert = certificate_singleton(m, k, deviations, quota)
                t = len(deviations[next(iter(cert.q))])
                bound = Fraction(-1, k * (k + 2 - t)) if quota is Quota.HARE else Fraction(0)
            else:
                cert = certificate_kplusone(m, deviations, quota)
                bound = Fraction(-(m - quota.denominator(k)), m * quota.denominator(k))
            record.result = {"construction": cert.construction, "bound": fraction_to_pair(bound)}
            self._artifact(record, "deviations", deviations.to_dict(), f"{stem}_deviations.json")
            self._artifact(record, "certificate", cert.to_dict(), f"{stem}_certificate.json")
            return self._verify(record, cert, deviations, m, k, quota, bound)

        if mode == "verify":
            if not deviations_path or not certificate_path:
                raise ParameterError("verify mode needs --deviations and --certificate")
            deviations = DeviationFunction.from_dict(read_json(deviations_path))
            cert = DualCertificate.from_dict(read_json(certificate_path), m)
            return self._verify(record, cert, deviations, m, k, quota, None)

        raise ParameterError(f"unknown certify mode {mode!r}")

    def _deviations(self, space, path, seed, singleton):
        if path:
            deviations = DeviationFunction.from_dict(read_json(path))
            if deviations.space != space:
                raise ParameterError(f"deviation file is for m={deviations.m}, k={deviations.k}")
            return deviations
        rng = make_rng(self.backend.seed if seed is None else seed)
        return random_deviation_function(space, rng, singleton_conforming=singleton)

    def _verify(self, record, cert, deviations, m, k, quota, bound):
        try:
            objective = verify_certificate(cert, deviations, m, k, quota)
        except CertificateViolation as exc:
            record.result["verified"] = False
            record.result["violation"] = str(exc)
            if exc.ballot is not None:
                record.result["ballot"] = exc.ballot.to_list()
            return self._finish(record, ExitCode.PROPERTY_FAILS)
        record.result["verified"] = True
        record.result["objective"] = fraction_to_pair(objective)
        record.result["objective_text"] = format_fraction(objective)
        within = bound is None or objective <= bound
        record.result["within_bound"] = within
        return self._finish(record, ExitCode.OK if within else ExitCode.PROPERTY_FAILS)

    # ============================================================================
    # PRICEABILITY
    # ============================================================================

    def priceability(self, instance_path, committee_text, kind=PriceKind.WEAK, k=None):
        """
        Weak, Lindahl or Peters priceability of one committee.

        Returns:
            RunRecord: exit 0 priceable, 1 not priceable, 2 undecided, 5 on solver failure
        """
        x = load_instance(instance_path)
        committee = parse_committee(committee_text, x.m)
        k = len(committee) if k is None else k
        record = self._record("priceability", instance=str(instance_path), committee=committee.to_list(),
                              k=k, kind=kind.value)
        result = check_priceability(x, committee, k, kind, self.backend)
        record.result = {"status": result.status.value, "lp_value": result.lp_value,
                         "dual_value": result.dual_value, "message": result.message}
        evidence = result.evidence
        if evidence is not None:
            name = "certificate" if result.certificate is not None else ("payment" if result.payment else "prices")
            self._artifact(record, name, evidence.to_dict(),
                           f"priceability_{kind.value}_{committee.variable_suffix}_{name}.json")
        if result.backend_error:
            return self._finish(record, ExitCode.BACKEND_ERROR)
        return self._finish(record, {
            PriceabilityStatus.PRICEABLE: ExitCode.OK,
            PriceabilityStatus.NOT_PRICEABLE: ExitCode.PROPERTY_FAILS,
            PriceabilityStatus.UNDECIDED: ExitCode.UNDECIDED,
        }[result.status])

    def counterexample(self, m, k, quota=Quota.DROOP, kind=PriceKind.WEAK, candidates_path=None):
        """
        Search for a stable but not priceable committee.

        Returns:
            RunRecord: exit 0 found, 1 proven absent, 2 undecided
        """
        record = self._record("counterexample", m=m, k=k, quota=quota.label, kind=kind.value,
                              candidates=candidates_path)
        candidates = None
        if candidates_path:
            data = read_json(candidates_path)
            entries = data if isinstance(data, list) else [data]
            candidates = [VoteDistribution.from_dict(entry) for entry in entries]
        result = search_counterexample(m, k, quota, kind, self.backend, candidates)
        record.result = result.to_dict()
        stem = f"counterexample_{kind.value}_m{m}_k{k}_{quota.label}"
        if result.distribution is not None:
            self._artifact(record, "distribution", result.distribution.to_dict(), f"{stem}_distribution.json")
        if result.certificate is not None:
            self._artifact(record, "certificate", result.certificate.to_dict(), f"{stem}_certificate.json")
        return self._finish(record, {
            CounterexampleStatus.FOUND: ExitCode.OK,
            CounterexampleStatus.ABSENT: ExitCode.PROPERTY_FAILS,
            CounterexampleStatus.UNDECIDED: ExitCode.UNDECIDED,
        }[result.status])

    def render_proof(self, certificate_path, clear_denominators=False):
        """
        Proof text from an infeasibility certificate file.

        Returns:
            tuple: (RunRecord, proof text or None); exit 1 when the certificate does not verify
        """
        record = self._record("render-proof", certificate=str(certificate_path),
                              clear_denominators=clear_denominators)
        cert = InfeasibilityCertificate.from_dict(read_json(certificate_path))
        try:
            text = render_proof(cert, clear_denominators)
        except CertificateViolation as exc:
            record.result = {"rendered": False, "violation": str(exc)}
            return self._finish(record, ExitCode.PROPERTY_FAILS), None
        stem = os.path.splitext(os.path.basename(str(certificate_path)))[0]
        path = os.path.join(self.output_dir, f"{stem}_proof.txt")
        os.makedirs(self.output_dir, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        record.add_artifact("proof", path)
        record.result = {"rendered": True, "lines": text.count("\n")}
        return self._finish(record, ExitCode.OK), text
