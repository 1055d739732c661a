#!/usr/bin/env python3
"""Reference values for the policy-gradient plumbing.

Independent of the C++ implementation: scipy for the Gaussian density, the
textbook Adam recurrences written out directly. Frozen outputs live in
test_metarl.cpp.
"""
import numpy as np
from scipy.special import expit
from scipy.stats import norm


def squashed_logprob(logit, mean, std):
    # density of a = sigmoid(logit) when logit ~ N(mean, std^2)
    jac = expit(logit) * (1.0 - expit(logit))
    return norm.logpdf(logit, mean, std) - np.log(jac)


def main():
    print("squashed-Gaussian logprob:")
    for logit, mean, std in [(0.7, 0.2, 0.3), (-1.5, 0.0, 0.05), (4.0, 3.5, 0.8),
                             (0.0, 0.0, 1.0)]:
        print(f"  logit={logit} mean={mean} std={std}: "
              f"{squashed_logprob(logit, mean, std)!r}")

    # normalization: integral over a in (0,1) of exp(logprob) da == 1
    n = 200001
    a = (np.arange(n) + 0.5) / n
    logit = np.log(a / (1 - a))
    p = np.exp(squashed_logprob(logit, 0.3, 0.8))
    print(f"  quadrature mass (mean=0.3, std=0.8): {np.sum(p) / n!r}")

    print("adam single step (g=0.02, lr=0.1):")
    g, lr, b1, b2, eps = 0.02, 0.1, 0.9, 0.999, 1e-8
    m = (1 - b1) * g
    v = (1 - b2) * g * g
    mhat = m / (1 - b1)
    vhat = v / (1 - b2)
    print(f"  delta = {-lr * mhat / (np.sqrt(vhat) + eps)!r}")
    # two steps with g2 = -0.01
    g2 = -0.01
    m2 = b1 * m + (1 - b1) * g2
    v2 = b2 * v + (1 - b2) * g2 * g2
    mhat2 = m2 / (1 - b1 ** 2)
    vhat2 = v2 / (1 - b2 ** 2)
    print(f"  delta2 = {-lr * mhat2 / (np.sqrt(vhat2) + eps)!r}")


if __name__ == "__main__":
    main()
