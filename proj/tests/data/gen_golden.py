"""Regenerates the frozen clustering fixtures and their golden outputs.

Reference outputs come from scikit-learn's HDBSCAN and the `hdbscan`
package's DBCV implementation; they are frozen so the C++ tests do not
depend on Python at test time.
"""
import numpy as np
from sklearn.cluster import HDBSCAN
from hdbscan.validity import validity_index


def save(name, X):
    np.savetxt(name, X, delimiter=",", fmt="%.17g")


rng = np.random.default_rng(7)
blobs = np.vstack([rng.normal((0.0, 0.0), 0.5, (40, 2)),
                   rng.normal((20.0, 0.0), 0.5, (40, 2))])
truth = np.repeat([0, 1], 40)
save("two_blobs.csv", blobs)
np.savetxt("two_blobs_truth.csv", truth, fmt="%d")
lab = HDBSCAN(min_samples=3, min_cluster_size=5).fit(blobs).labels_
np.savetxt("two_blobs_golden.csv", lab, fmt="%d")

shuffled = np.random.default_rng(3).permutation(truth)
np.savetxt("two_blobs_shuffled.csv", shuffled, fmt="%d")
with open("two_blobs_dbcv.txt", "w") as f:
    f.write("%.17g\n" % validity_index(blobs, truth))
    f.write("%.17g\n" % validity_index(blobs, shuffled))

rng = np.random.default_rng(11)
uniform = rng.uniform(0.0, 1.0, (200, 2))
save("uniform.csv", uniform)
lab = HDBSCAN(min_samples=5, min_cluster_size=50).fit(uniform).labels_
np.savetxt("uniform_golden.csv", lab, fmt="%d")
print("two_blobs clusters", set(np.loadtxt("two_blobs_golden.csv", dtype=int)))
print("uniform noise fraction", float(np.mean(lab == -1)))
print(open("two_blobs_dbcv.txt").read())

rng = np.random.default_rng(23)
mixed = np.vstack([rng.normal((0.0, 0.0), 0.3, (60, 2)),
                   rng.normal((4.0, 4.0), 0.8, (50, 2)),
                   rng.normal((8.0, -1.0), 0.5, (40, 2)),
                   rng.uniform(-3.0, 11.0, (30, 2))])
save("mixed.csv", mixed)
lab = HDBSCAN(min_samples=5, min_cluster_size=10).fit(mixed).labels_
np.savetxt("mixed_golden.csv", lab, fmt="%d")
lab_m = HDBSCAN(min_samples=5, min_cluster_size=10, metric="manhattan").fit(mixed).labels_
np.savetxt("mixed_golden_manhattan.csv", lab_m, fmt="%d")
with open("mixed_dbcv.txt", "w") as f:
    f.write("%.17g\n" % validity_index(mixed, lab))
print("mixed", np.unique(lab, return_counts=True), np.unique(lab_m, return_counts=True))
print(open("mixed_dbcv.txt").read())
