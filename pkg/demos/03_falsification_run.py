"""Looking for a counterexample among smooth cylindrical fields.

Every field phi(e . x) with smooth convex non-affine phi is convex,
developable and (for |phi'| < 1) spacelike.  If such a field ever came back
"hyperplane-consistent" it would either expose a tolerance bug or contradict
the rigidity statements.  It never does: along the line where phi'' peaks the
curvature does not decay.
"""

from collections import Counter

from gaussflat.corpus import corpus, random_cylindrical_fields
from gaussflat.rigidity import rigidity_verdict

fields = corpus() + random_cylindrical_fields(20, seed=1)
tally = Counter()
for f in fields:
    v = rigidity_verdict(f, "mean-minkowski-tilde", seed=1)
    tally[v.outcome] += 1
    value = "" if v.witness is None else f"{v.witness.kind} = {v.witness.value:.4g}"
    print(f"{f.name:52s} {v.outcome:24s} {value}")
print(dict(tally))
