"""Isomorphism classes of irredundant test spaces, counted without canonical forms.

Candidates are antichains of nonempty subsets covering {0..n-1}; two candidates are
merged when some relabeling maps one family onto the other (checked pairwise).
"""
import itertools
import sys


def candidates(n, k):
    subsets = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]
    for m in range(1, k + 1):
        for fam in itertools.combinations(subsets, m):
            if any(a <= b for a in fam for b in fam if a is not b):
                continue
            if frozenset().union(*fam) != frozenset(range(n)):
                continue
            yield frozenset(fam)


def invariant(fam):
    return tuple(sorted(len(t) for t in fam)), tuple(
        sorted(sum(1 for t in fam if x in t) for x in set().union(*fam)))


def isomorphic(f, g, n):
    for p in itertools.permutations(range(n)):
        if frozenset(frozenset(p[x] for x in t) for t in f) == g:
            return True
    return False


def classes(n, k):
    reps = {}
    for fam in candidates(n, k):
        bucket = reps.setdefault(invariant(fam), [])
        if not any(isomorphic(fam, r, n) for r in bucket):
            bucket.append(fam)
    return sum(len(b) for b in reps.values())


if __name__ == "__main__":
    max_n, max_k = (int(a) for a in sys.argv[1:3]) if len(sys.argv) > 2 else (6, 3)
    total = 0
    for n in range(1, max_n + 1):
        c = classes(n, max_k)
        total += c
        print(f"n={n} k<={max_k}: {c}")
    print(f"total ({max_n},{max_k}): {total}")
