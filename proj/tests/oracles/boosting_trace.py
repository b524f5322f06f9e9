# AdaBoost.M1 trace with weighted-Gini decision stumps on a 1-D toy set.
# Exact rational arithmetic for the stump choice; floats for the log/exp steps.
from fractions import Fraction as F
import math

X = [1, 2, 3, 4, 5, 6]
Y = [0, 1, 0, 0, 1, 1]
ROUNDS = 3


def gini(w0, w1):
    t = w0 + w1
    return 1 - (w0 / t) ** 2 - (w1 / t) ** 2


def stump(d):
    w = [F(v).limit_denominator(10**12) * len(X) for v in d]
    W0 = sum(w[i] for i in range(len(X)) if Y[i] == 0)
    W1 = sum(w[i] for i in range(len(X)) if Y[i] == 1)
    parent = gini(W0, W1)
    best = None
    for k in range(1, len(X)):
        thr = F(X[k - 1] + X[k], 2)
        l0 = sum(w[i] for i in range(k) if Y[i] == 0)
        l1 = sum(w[i] for i in range(k) if Y[i] == 1)
        r0, r1 = W0 - l0, W1 - l1
        gain = parent - (l0 + l1) / (W0 + W1) * gini(l0, l1) - (r0 + r1) / (W0 + W1) * gini(r0, r1)
        if best is None or gain > best[0]:
            best = (gain, thr, l1 / (l0 + l1), r1 / (r0 + r1))
    _, thr, pl, pr = best
    return thr, [int((pl if x <= thr else pr) >= F(1, 2)) for x in X]


d = [1.0 / len(X)] * len(X)
for t in range(ROUNDS):
    thr, pred = stump(d)
    err = sum(d[i] for i in range(len(X)) if pred[i] != Y[i])
    alpha = 0.5 * math.log((1 - err) / err)
    print(f"round {t}: D={[repr(v) for v in d]} thr={float(thr)} pred={pred} err={err!r} alpha={alpha!r}")
    d = [d[i] * math.exp(-alpha * (1 if pred[i] == Y[i] else -1)) for i in range(len(X))]
    z = sum(d)
    d = [v / z for v in d]
print("final D", [repr(v) for v in d])
