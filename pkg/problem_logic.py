import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from analytic.condensate_logic import oracle_for
from config import Config
from diagnose import (MissingOracleError, Tolerances, VerificationReport, build_report,
                      convergence_study, weighted_oracle_error)
from geometry import Quadrature, discretize, exclusion_mask, nodes_for_count
from kernel import QuadraticForm, assemble_form
from problem_config import ProblemConfig
from solver import CONVERGED, NOT_PSD, DiscreteMeasure, SolveReport, SolverError, solve_pair, variational_residual
from states_store import StatesStore, kernel_dump


@dataclass
class SolveOutcome:
    form: QuadraticForm
    m_u: DiscreteMeasure
    report_u: SolveReport
    m_v: Optional[DiscreteMeasure]
    report_v: Optional[SolveReport]
    verification: VerificationReport

    @property
    def converged(self) -> bool:
        return self.report_u.status == CONVERGED and (self.report_v is None or self.report_v.status == CONVERGED)


class ProblemLogic:
    def __init__(self, problem: ProblemConfig, out_dir: Optional[str] = None, tol: Optional[float] = None):
        self.problem = problem
        self.store = StatesStore(out_dir or problem.output_dir)
        self.tol = problem.solver.tol if tol is None else tol
        overrides = dict(problem.checks.get('tolerances') or {})
        self.tolerances = Tolerances(solver_tol=self.tol, **overrides)

    def quadrature(self, nodes_per_unit: Optional[float] = None, cell_size: Optional[float] = None) -> Quadrature:
        p = self.problem
        return discretize(p.support, nodes_per_unit or p.nodes_per_unit, cell_size or p.cell_size)

    def assemble(self, q: Quadrature) -> QuadraticForm:
        p = self.problem
        return assemble_form(q, p.kernel, p.rhs, p.sigma)

    def _measure(self, q: Quadrature, u: np.ndarray, signed: bool = False) -> DiscreteMeasure:
        return DiscreteMeasure(q, u, signed=signed, support_threshold=self.problem.solver.support_threshold)

    def oracle_error(self, q: Quadrature, u: np.ndarray) -> Optional[dict]:
        """Endpoint-weighted relative max error against the configured oracle, outside the exclusion zones"""
        if not self.problem.oracle:
            return None
        try:
            oracle = oracle_for(self.problem.oracle)
        except LookupError as e:
            raise MissingOracleError(str(e)) from e
        error = weighted_oracle_error(q, u, oracle(q.nodes))
        result = {'type': self.problem.oracle.get('type'), 'max_rel_error': error, 'norm': 'endpoint_weighted'}
        if 'tolerance' in self.problem.oracle:
            result['passed'] = error <= float(self.problem.oracle['tolerance'])
        return result

    def verification(self, form: QuadraticForm, m_u: DiscreteMeasure, m_v: Optional[DiscreteMeasure],
                     oracle: Optional[dict] = None) -> VerificationReport:
        report = build_report(form, m_u, self.problem.support, self.tolerances, m_v=m_v,
                              temporal_rhs=self.problem.temporal_rhs if m_v is not None else None,
                              checks=self.problem.checks)
        report.pass_flags['nonnegative_density'] = not bool(np.any(m_u.u < 0))
        if oracle is not None and 'passed' in oracle:
            report.pass_flags['oracle'] = oracle['passed']
        return report

    def _payload(self, form: QuadraticForm, verification: VerificationReport, solve_section: Optional[dict],
                 oracle: Optional[dict]) -> dict:
        q = form.quadrature
        return {
            'problem': {
                'name': self.problem.name,
                'kernel': form.kernel.name,
                'rhs': form.rhs.name,
                'temporal_rhs': self.problem.temporal_rhs.name if self.problem.temporal_rhs else None,
                'sigma': form.sigma.name,
                'n': q.n,
                'dimension': q.dimension,
                'tol': self.tol,
            },
            'solve': solve_section,
            'oracle': oracle,
            'verification': verification.to_dict(),
            'passed': verification.passed,
        }

    def _save_states(self, form: QuadraticForm, m_u: DiscreteMeasure, m_v: Optional[DiscreteMeasure]):
        q = form.quadrature
        support = m_u.support_mask
        v = s = residual_v = None
        if m_v is not None:
            v = m_v.u
            s = np.zeros(q.n)
            s[support] = v[support] / m_u.u[support]
            residual_v = variational_residual(form.with_rhs(self.problem.temporal_rhs), m_v)
        self.store.save_states(q, m_u.u, variational_residual(form, m_u), support, exclusion_mask(q),
                               v=v, s=s, residual_v=residual_v)

    def solve(self) -> SolveOutcome:
        """
        Discretize, assemble, solve both NDRs, verify and write the artifacts

        Returns:
            SolveOutcome

        Raises:
            SolverError: when the density form is not positive definite on the free set
        """
        p = self.problem
        q = self.quadrature()
        if Config.VERBOSE:
            print(f"🚀 Solving {p.name}: {q.n} nodes, {p.kernel.name} kernel, {p.rhs.name} right-hand side")
        form = self.assemble(q)
        m_u, report_u, m_v, report_v = solve_pair(form, p.temporal_rhs, tol=self.tol, max_iter=p.solver.max_iter,
                                                  support_threshold=p.solver.support_threshold)
        if report_u.status == NOT_PSD:
            raise SolverError(f"NotPSD: {p.kernel.name} form is not positive definite on the free set")
        if Config.VERBOSE:
            print(f"📊 {report_u.status} after {report_u.iterations} iterations, "
                  f"kkt {report_u.kkt_residual:.3e}, energy {report_u.energy:.12g}")

        oracle = self.oracle_error(q, m_u.u)
        verification = self.verification(form, m_u, m_v, oracle)
        solve_section = {
            'density': report_u.to_dict(),
            'temporal': report_v.to_dict() if report_v is not None else None,
            'support_size': int(m_u.support_mask.sum()),
            'mass': m_u.mass,
        }
        self._save_states(form, m_u, m_v)
        self.store.save_quadrature(q)
        self.store.save_report(self._payload(form, verification, solve_section, oracle))
        return SolveOutcome(form, m_u, report_u, m_v, report_v, verification)

    def verify(self) -> VerificationReport:
        """Recompute the verification section from the stored states.csv"""
        p = self.problem
        q = self.quadrature()
        columns = self.store.load_states()
        if columns['nodes'].shape != q.nodes.shape or not np.allclose(columns['nodes'], q.nodes, rtol=0, atol=1e-12):
            raise ValueError(f"{self.store.path('states.csv')} does not match the configured quadrature")
        if Config.VERBOSE:
            print(f"🔍 Verifying {p.name} from {self.store.path('states.csv')}")
        form = self.assemble(q)
        u = columns['u']
        m_u = self._measure(q, u, signed=bool(np.any(u < 0)))
        m_v = None
        if 'v' in columns and p.temporal_rhs is not None:
            m_v = self._measure(q, columns['v'], signed=True)
        oracle = self.oracle_error(q, u)
        verification = self.verification(form, m_u, m_v, oracle)
        stored = self.store.load_report()
        solve_section = stored.get('solve') if stored else None
        self.store.save_report(self._payload(form, verification, solve_section, oracle))
        return verification

    def solve_at(self, n: int):
        """Density solve at about n nodes (convergence ladders)"""
        p = self.problem
        if p.support.is_one_dimensional():
            q = self.quadrature(nodes_per_unit=nodes_for_count(p.support, n))
        else:
            area = sum(prim.area for prim in p.support.primitives if prim.dimension == 2)
            cell_size = math.sqrt(area / n)
            # curves of a mixed support refine with the cells
            nodes_per_unit = p.nodes_per_unit * p.cell_size / cell_size if p.nodes_per_unit else None
            q = self.quadrature(nodes_per_unit=nodes_per_unit, cell_size=cell_size)
        form = self.assemble(q)
        m_u, report, _, _ = solve_pair(form, None, tol=self.tol, max_iter=p.solver.max_iter,
                                       support_threshold=p.solver.support_threshold)
        if report.status == NOT_PSD:
            raise SolverError(f"NotPSD at n = {q.n}")
        return q, m_u.u

    def converge(self, ns: Sequence[int]) -> List[dict]:
        """Error table against the oracle; writes convergence.csv"""
        if not self.problem.oracle:
            raise MissingOracleError(f"problem '{self.problem.name}' has no oracle")
        try:
            oracle = oracle_for(self.problem.oracle)
        except LookupError as e:
            raise MissingOracleError(str(e)) from e
        if Config.VERBOSE:
            print(f"🚀 Convergence study for {self.problem.name}: n = {list(ns)}")
        rows = convergence_study(self.solve_at, sorted(ns), oracle)
        self.store.save_convergence(rows)
        return rows

    def dump_kernel(self, path: Optional[str] = None) -> str:
        q = self.quadrature()
        form = self.assemble(q)
        if path is None:
            self.store.save_kernel(form)
            return self.store.path('kernel.bin')
        with open(path, 'wb') as f:
            f.write(kernel_dump(form))
        if Config.VERBOSE:
            print(f"💾 Wrote {path}")
        return path
