"""Independent reference values for the evidence and latent-posterior tests.

Integrates the binomial-mixture likelihood over the label-ordered uniform
prior (theta_1 > theta_2, density doubled) with scipy's adaptive cubature.
"""
import itertools
import math

import numpy as np
from scipy import integrate
from scipy.special import comb

N = 3
XS = [0, 1, 3, 2, 3, 0, 1, 2]
YS = [2, 2, 1, 1, 1, 2, 2, 1]


def lik_marginal(a, b, c):
    v = 1.0
    for x in XS:
        v *= comb(N, x) * (a * b**x * (1 - b) ** (N - x) + (1 - a) * c**x * (1 - c) ** (N - x))
    return v


def lik_joint(a, b, c, ys):
    v = 1.0
    for x, y in zip(XS, ys):
        if y == 1:
            v *= comb(N, x) * a * b**x * (1 - b) ** (N - x)
        else:
            v *= comb(N, x) * (1 - a) * c**x * (1 - c) ** (N - x)
    return v


def ordered(f):
    # c in (0, b), b in (0, 1), a in (0, 1); prior density 2
    val, _ = integrate.tplquad(lambda c, b, a: 2.0 * f(a, b, c), 0, 1, 0, 1, 0, lambda a, b: b,
                               epsabs=1e-14, epsrel=1e-12)
    return val


if __name__ == "__main__":
    z_x = ordered(lik_marginal)
    z_xy = ordered(lambda a, b, c: lik_joint(a, b, c, YS))
    print("ln Z(X) ordered       = %.15g" % math.log(z_x))
    print("ln Z(X,Y) ordered     = %.15g" % math.log(z_xy))
    print("ln p(Y|X)             = %.15g" % (math.log(z_xy) - math.log(z_x)))
    # unordered: closed form check of the complete-data evidence
    from scipy.special import betaln
    n1 = YS.count(1); n2 = YS.count(2)
    s1 = sum(x for x, y in zip(XS, YS) if y == 1); s2 = sum(x for x, y in zip(XS, YS) if y == 2)
    lc = sum(math.log(comb(N, x)) for x in XS)
    print("ln Z(X,Y) unordered   = %.15g" % (lc + betaln(1 + n1, 1 + n2) + betaln(1 + s1, 1 + N * n1 - s1) + betaln(1 + s2, 1 + N * n2 - s2)))
