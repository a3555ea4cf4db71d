"""Reference Fisher matrices and coefficients for the binomial mixture.

Scores come from sympy symbolic differentiation; expectations are exact
sums over the finite support. Coefficients use numpy's dense eigensolver.
"""
import numpy as np
import sympy as sp

a, b, c = sp.symbols("a b c", positive=True)
W = (a, b, c)
N = 3
W_STAR = {a: sp.Rational(1, 2), b: sp.Rational(4, 5), c: sp.Rational(1, 4)}


def comp(t, x):
    return sp.binomial(N, x) * t**x * (1 - t) ** (N - x)


def fisher():
    ixy = sp.zeros(3, 3)
    ix = sp.zeros(3, 3)
    for x in range(N + 1):
        joint = [a * comp(b, x), (1 - a) * comp(c, x)]
        marg = joint[0] + joint[1]
        sm = [sp.diff(sp.log(marg), v) for v in W]
        for y in range(2):
            sj = [sp.diff(sp.log(joint[y]), v) for v in W]
            for i in range(3):
                for j in range(3):
                    ixy[i, j] += joint[y] * sj[i] * sj[j]
                    ix[i, j] += joint[y] * sm[i] * sm[j]
    f = lambda m: np.array(m.subs(W_STAR).evalf(30).tolist(), dtype=float)
    return f(ixy), f(ix)


if __name__ == "__main__":
    ixy, ix = fisher()
    np.set_printoptions(precision=17)
    print("I_XY =", repr(ixy))
    print("I_X =", repr(ix))
    lam = np.sort(np.linalg.eigvals(ixy @ np.linalg.inv(ix)).real)[::-1]
    print("lambda =", repr(lam))
    print("eig I_X =", repr(np.sort(np.linalg.eigvalsh(ix))[::-1]))
    alpha = 0.5
    print("ml_type1 = %.17g" % (0.5 * np.sum(lam - 1)))
    print("bayes_type1 = %.17g" % (0.5 * np.sum(np.log(lam))))
    print("gap = %.17g" % (0.5 * np.sum(lam - 1 - np.log(lam))))
    mu = alpha * lam + 1 - alpha
    print("type2p(0.5) = %.17g" % (np.sum(np.log(mu)) / (2 * alpha)))
    print("gap_alpha(0.5) = %.17g" % (np.sum(mu - 1 - np.log(mu)) / (2 * alpha)))
    print("supp_gain(0.5) = %.17g" % (np.sum(np.log(lam) - np.log(mu)) / (2 * alpha)))
