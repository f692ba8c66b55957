"""Single trees, bagged forests, and gradient boosting on an XOR toy.

The XOR clusters (same label in opposite quadrants) need a feature
interaction, so no single axis-aligned split helps: greedy trees place their
first cuts almost blindly and need depth 6 to untangle the quadrants, while
boosted depth-2 trees get there by accumulating many small corrections.

Run:  python demos/06_trees_and_boosting.py
"""

import numpy as np

from readmitlab.trees import (ClassificationTree, GradientBoostedClassifier,
                              RandomForest)

rng = np.random.default_rng(5)
centers = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
X = np.vstack([c + rng.normal(scale=0.3, size=(40, 2)) for c in centers])
y = np.repeat([0, 0, 1, 1], 40)  # diagonal pairs share a label


def acc(model):
    return float(np.mean(model.predict(X) == y))


stump = ClassificationTree(max_depth=1).fit(X, y)
mid = ClassificationTree(max_depth=3).fit(X, y)
deep = ClassificationTree(max_depth=6).fit(X, y)
forest = RandomForest(n_trees=50, max_depth=3, seed=0).fit(X, y)
gbm = GradientBoostedClassifier(n_rounds=50, learning_rate=0.1,
                                max_depth=2).fit(X, y)

print(f"depth-1 stump      : {acc(stump):.1%}")
print(f"depth-3 tree       : {acc(mid):.1%}")
print(f"depth-6 tree       : {acc(deep):.1%}")
print(f"50-tree forest     : {acc(forest):.1%}")
print(f"50-round boosting  : {acc(gbm):.1%}")

# boosting's training deviance must fall (or hold) every round
deviance = np.array(gbm.train_deviance_)
print(f"\ndeviance round  1: {deviance[0]:.4f}")
print(f"deviance round 25: {deviance[24]:.4f}")
print(f"deviance round 50: {deviance[-1]:.4f}")
print("non-increasing every round:", bool(np.all(np.diff(deviance) <= 1e-12)))

# a forest of one full-sample, all-features tree IS a single tree
lone = RandomForest(n_trees=1, max_depth=3, features_per_split="all",
                    bootstrap=False).fit(X, y)
single = ClassificationTree(max_depth=3).fit(X, y)
probe = rng.normal(scale=1.5, size=(500, 2))
print("\nlone-tree forest equals a standalone tree:",
      bool(np.array_equal(lone.predict(probe), single.predict(probe))))

# trees serialize to plain dicts (JSON-ready)
payload = gbm.to_dict()
again = GradientBoostedClassifier.from_dict(payload)
print("boosting round-trips through a dict:",
      bool(np.array_equal(again.predict(X), gbm.predict(X))))
