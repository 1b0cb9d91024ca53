"""Randomized property suites behind ``cohere verify``.

Each check takes a sample index and a parent seed, derives its own stream
from them and returns ``True`` when the property holds. Results therefore do
not depend on how samples are sharded across workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import basis_opt, measures, probe, sampling, swapcirc
from .qmat import dagger, purity

TOL = 1e-9
CLOSED_FORMS = {
    "c2": measures.c2,
    "c_re": measures.c_re,
    "c_skew": measures.c_skew,
    "c_trace": measures.c_trace,
}


def _stream(seed: int, index: int) -> sampling.SeededStream:
    return sampling.SeededStream(seed).child(index)


def _dim(rng, low=2, high=4) -> int:
    return int(rng.integers(low, high + 1))


def check_closed_form(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    rho = sampling.random_density(n, None, st)
    lam = np.linalg.eigvalsh(rho).clip(0)
    ok = abs(measures.c2(rho) - (np.trace(rho @ rho).real - 1 / n)) <= TOL
    ok &= abs(measures.c2_distance(rho) - measures.c2(rho)) <= 1e-12
    ok &= abs(measures.c_re_distance(rho) - measures.c_re(rho)) <= TOL
    ok &= abs(measures.c_skew(rho) - (1 - np.sum(np.sqrt(lam)) ** 2 / n)) <= TOL
    return bool(ok)


def check_optimality(index: int, seed: int, n_unitaries: int = 500) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    rho = sampling.random_density(n, None, st)
    uni = measures.uniformizing_unitary(rho)
    us = sampling.haar_unitaries(n, n_unitaries, st)
    ok = True
    for kind, f, closed in (("l2", measures.basis_coherence_l2, measures.c2(rho)),
                            ("re", measures.basis_coherence_re, measures.c_re(rho))):
        ok &= measures.basis_coherence_batch(rho, us, kind).max() <= closed + TOL
        ok &= abs(f(rho, uni) - closed) <= TOL
    return bool(ok)


def check_unitary_invariance(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    rho = sampling.random_density(n, None, st)
    u = sampling.haar_unitary(n, st)
    rot = u @ rho @ dagger(u)
    return all(abs(f(rot) - f(rho)) <= TOL for f in CLOSED_FORMS.values())


def check_convexity(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    k = int(st.rng.integers(2, 5))
    p = sampling.random_probabilities(k, st)
    states = [sampling.random_density(n, int(st.rng.integers(1, n + 1)), st) for _ in range(k)]
    mix = sum(pi * r for pi, r in zip(p, states))
    return all(f(mix) <= sum(pi * f(r) for pi, r in zip(p, states)) + TOL
               for f in CLOSED_FORMS.values())


def check_monotonicity(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    ch = sampling.random_unital_channel(n, int(st.rng.integers(1, 5)), st)
    rho = sampling.random_density(n, int(st.rng.integers(1, n + 1)), st)
    out = sampling.apply_channel(ch, rho)
    ok = all(f(out) <= f(rho) + TOL for f in CLOSED_FORMS.values())
    # average coherence over the unitary branches is preserved
    for f in CLOSED_FORMS.values():
        avg = sum(pi * f(u @ rho @ dagger(u)) for pi, u in zip(ch.probabilities, ch.unitaries))
        ok &= abs(avg - f(rho)) <= TOL
    return bool(ok)


def check_purity(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    ch = sampling.random_unital_channel(n, int(st.rng.integers(1, 5)), st)
    rho = sampling.random_density(n, None, st)
    return purity(sampling.apply_channel(ch, rho)) <= purity(rho) + TOL


def check_circuit(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    k = int(st.rng.integers(1, n + 1))
    rho = sampling.random_density(n, None, st)
    exact = (1 + np.sum(np.linalg.eigvalsh(rho) ** k)) / 2
    return abs(swapcirc.swap_test_probability(rho, k) - exact) <= 1e-10


def check_probe(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    n = _dim(st.rng)
    v = st.rng.normal(size=3)
    v *= st.rng.uniform() / np.linalg.norm(v)
    rho_s = sampling.random_density(n, None, st)
    u = sampling.haar_unitary(n, st)
    closed = probe.final_probe_closed(v, rho_s, u)
    sim = probe.final_probe_simulated(v, rho_s, u)
    d = probe.delta_c(v, rho_s, u)
    direct = abs(measures.c2(closed) - measures.c2(probe.probe_state(v)))
    return bool(np.max(np.abs(closed - sim)) <= 1e-10 and abs(d - direct) <= 1e-10)


def check_c1_oracle(index: int, seed: int) -> bool:
    st = _stream(seed, index)
    rho = sampling.random_density(2, None, st)
    cfg = basis_opt.OptimizerConfig(restarts=4, stream=st)
    return abs(basis_opt.c1(rho, cfg) - basis_opt.bloch_radius_c1(rho)) <= 1e-6


def check_shots(index: int, seed: int) -> bool:
    # one 10^4-shot experiment must land within 4 sigma of the exact moment
    st = _stream(seed, index)
    rho = sampling.random_density(2, None, st)
    rec = swapcirc.sample_swap_test(rho, 2, 10_000, st)
    p = swapcirc.swap_test_probability(rho, 2)
    sigma = 2 * np.sqrt(p * (1 - p) / rec.shots)
    return abs(rec.estimate - (2 * p - 1)) <= 4 * sigma + 1e-12


SUITES = {
    "closed-form": check_closed_form,
    "optimality": check_optimality,
    "invariance": check_unitary_invariance,
    "convexity": check_convexity,
    "monotonicity": check_monotonicity,
    "purity": check_purity,
    "circuit": check_circuit,
    "probe": check_probe,
    "c1-oracle": check_c1_oracle,
    "shots": check_shots,
}


@dataclass
class SuiteResult:
    suite: str
    samples: int
    passed: int
    seed: int
    failures: list[int]

    @property
    def ok(self) -> bool:
        return self.passed == self.samples


def _run_chunk(args) -> list[bool]:
    name, seed, indices = args
    fn = SUITES[name]
    return [fn(i, seed) for i in indices]


def run_suite(name: str, samples: int, seed: int, jobs: int | None = None) -> SuiteResult:
    jobs = jobs or os.cpu_count() or 1
    indices = list(range(samples))
    if jobs <= 1 or samples < 2 * jobs:
        flags = _run_chunk((name, seed, indices))
    else:
        chunks = [indices[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_run_chunk, [(name, seed, c) for c in chunks]))
        flags = [False] * samples
        for c, part in zip(chunks, parts):
            for i, f in zip(c, part):
                flags[i] = f
    fails = [i for i, f in enumerate(flags) if not f]
    return SuiteResult(name, samples, samples - len(fails), seed, fails)
