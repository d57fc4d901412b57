# Copyright 2024 Red Hat
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""Gamma and Riemann zeta evaluators over the real line.

Only the real arguments reached by the spin-wave closed forms are needed:
Gamma on positive reals and zeta on reals above zero, excluding the pole.
"""

import math

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

ZETA_TERMS = 40


def gamma(x):
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError('gamma has a pole at %s' % x)
    if x < 0.5:
        # reflection
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = LANCZOS_COEFFICIENTS[0]
    for i, c in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        acc += c / (x + i)
    t = x + LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def lgamma(x):
    """log |Gamma(x)|, finite where Gamma itself overflows."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError('gamma has a pole at %s' % x)
    if x < 0.5:
        return (math.log(math.pi / abs(math.sin(math.pi * x))) -
                lgamma(1.0 - x))
    x -= 1.0
    acc = LANCZOS_COEFFICIENTS[0]
    for i, c in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        acc += c / (x + i)
    t = x + LANCZOS_G + 0.5
    return (0.5 * math.log(2 * math.pi) + (x + 0.5) * math.log(t) - t +
            math.log(acc))


def _borwein_weights(n):
    total = 0.0
    weights = []
    for i in range(n + 1):
        total += (math.factorial(n + i - 1) * 4 ** i /
                  (math.factorial(n - i) * math.factorial(2 * i)))
        weights.append(n * total)
    return weights


_WEIGHTS = _borwein_weights(ZETA_TERMS)


def zeta(s):
    """Riemann zeta through the accelerated alternating eta series.

    :param s: real argument, s > 0 and s != 1
    :return: zeta(s)
    """
    s = float(s)
    if s == 1.0:
        raise ValueError('zeta has a pole at s=1')
    if s <= 0:
        raise ValueError('zeta is only evaluated for s > 0, got %s' % s)
    n = ZETA_TERMS
    d_n = _WEIGHTS[n]
    acc = 0.0
    for k in range(n):
        acc += (-1) ** k * (_WEIGHTS[k] - d_n) * (k + 1.0) ** -s
    # 1 - 2**(1-s) without cancellation near the pole
    factor = -math.expm1((1.0 - s) * math.log(2.0))
    return -acc / (d_n * factor)
