"""Commutant dimension and surviving orthogonal symmetries for LTI generators.

For an integrator chain only +I and -I commute with A, so the only bipartite
consensus pattern available is the signed one.

    python3 scripts/linear_symmetries.py --max-order 6 --candidates 500
"""

import argparse

import numpy as np

from sympat.dynamics import integrator_chain_matrices
from sympat.symmetry import (SymmetryElement, commutant_basis, identity, negation, orthogonal_commutant_members,
                             random_orthogonal)


def main():
    ap = argparse.ArgumentParser(description="commutant analysis of integrator chains and the harmonic generator")
    ap.add_argument("--max-order", type=int, default=5)
    ap.add_argument("--candidates", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for n in range(2, args.max_order + 1):
        A = integrator_chain_matrices(n)[0]
        cands = [identity(n), negation(n)] + [SymmetryElement(random_orthogonal(n, rng))
                                              for _ in range(args.candidates)]
        kept = orthogonal_commutant_members(A, cands)
        print(f"chain n={n}: commutant dim {len(commutant_basis(A))}, "
              f"surviving symmetries {[g.label or 'random' for g in kept]}")
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    angles = rng.uniform(0, 2 * np.pi, args.candidates)
    rots = [SymmetryElement(np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])) for a in angles]
    refl = [SymmetryElement(np.array([[np.cos(a), np.sin(a)], [np.sin(a), -np.cos(a)]])) for a in angles]
    kept = orthogonal_commutant_members(J, rots + refl)
    n_refl = sum(1 for g in kept if np.linalg.det(g.matrix) < 0)
    print(f"harmonic generator: commutant dim {len(commutant_basis(J))}, "
          f"kept {len(kept) - n_refl}/{len(rots)} rotations and {n_refl}/{len(refl)} reflections")

if __name__ == "__main__":
    main()
