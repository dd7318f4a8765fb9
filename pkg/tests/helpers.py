"""Shared generators for the test suite."""

from symelim.exactalg import Polynomial, PolyRing


def random_polynomial(rng, ring: PolyRing, max_degree=3, max_terms=4, coeff=5) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * ring.nvars
        budget = rng.randint(0, max_degree)
        for _ in range(budget):
            exps[rng.randrange(ring.nvars)] += 1
        c = rng.randint(-coeff, coeff)
        if c:
            terms[tuple(exps)] = terms.get(tuple(exps), 0) + c
    p = Polynomial(ring, terms)
    return p if p else ring.gens[0] + 1
