"""Coefficient table for the operational UTCI polynomial approximation.

These are the published coefficients of the 6th-order polynomial regression
of the UTCI-Fiala model (UTCI_approx Version a 0.002, October 2009,
www.utci.org; Broede et al. 2012, Int J Biometeorol 56:481-494).
Each term is (i, j, k, l, coefficient) for
coefficient * t_air**i * wind_10m**j * (t_mrt - t_air)**k * (pa_kpa)**l,
and the full value is t_air plus the sum of all terms.

The table is integrity-checked at import time against a SHA-256 digest of
its canonical text form so silent edits are caught.
"""

import hashlib

UTCI_POLYNOMIAL_TERMS: tuple[tuple[int, int, int, int, float], ...] = (
    (0, 0, 0, 0, 0.607562052),
    (1, 0, 0, 0, -0.0227712343),
    (2, 0, 0, 0, 8.06470249e-4),
    (3, 0, 0, 0, -1.54271372e-4),
    (4, 0, 0, 0, -3.24651735e-6),
    (5, 0, 0, 0, 7.32602852e-8),
    (6, 0, 0, 0, 1.35959073e-9),
    (0, 1, 0, 0, -2.25836520),
    (1, 1, 0, 0, 0.0880326035),
    (2, 1, 0, 0, 0.00216844454),
    (3, 1, 0, 0, -1.53347087e-5),
    (4, 1, 0, 0, -5.72983704e-7),
    (5, 1, 0, 0, -2.55090145e-9),
    (0, 2, 0, 0, -0.751269505),
    (1, 2, 0, 0, -0.00408350271),
    (2, 2, 0, 0, -5.21670675e-5),
    (3, 2, 0, 0, 1.94544667e-6),
    (4, 2, 0, 0, 1.14099531e-8),
    (0, 3, 0, 0, 0.158137256),
    (1, 3, 0, 0, -6.57263143e-5),
    (2, 3, 0, 0, 2.22697524e-7),
    (3, 3, 0, 0, -4.16117031e-8),
    (0, 4, 0, 0, -0.0127762753),
    (1, 4, 0, 0, 9.66891875e-6),
    (2, 4, 0, 0, 2.52785852e-9),
    (0, 5, 0, 0, 4.56306672e-4),
    (1, 5, 0, 0, -1.74202546e-7),
    (0, 6, 0, 0, -5.91491269e-6),
    (0, 0, 1, 0, 0.398374029),
    (1, 0, 1, 0, 1.83945314e-4),
    (2, 0, 1, 0, -1.73754510e-4),
    (3, 0, 1, 0, -7.60781159e-7),
    (4, 0, 1, 0, 3.77830287e-8),
    (5, 0, 1, 0, 5.43079673e-10),
    (0, 1, 1, 0, -0.0200518269),
    (1, 1, 1, 0, 8.92859837e-4),
    (2, 1, 1, 0, 3.45433048e-6),
    (3, 1, 1, 0, -3.77925774e-7),
    (4, 1, 1, 0, -1.69699377e-9),
    (0, 2, 1, 0, 1.69992415e-4),
    (1, 2, 1, 0, -4.99204314e-5),
    (2, 2, 1, 0, 2.47417178e-7),
    (3, 2, 1, 0, 1.07596466e-8),
    (0, 3, 1, 0, 8.49242932e-5),
    (1, 3, 1, 0, 1.35191328e-6),
    (2, 3, 1, 0, -6.21531254e-9),
    (0, 4, 1, 0, -4.99410301e-6),
    (1, 4, 1, 0, -1.89489258e-8),
    (0, 5, 1, 0, 8.15300114e-8),
    (0, 0, 2, 0, 7.55043090e-4),
    (1, 0, 2, 0, -5.65095215e-5),
    (2, 0, 2, 0, -4.52166564e-7),
    (3, 0, 2, 0, 2.46688878e-8),
    (4, 0, 2, 0, 2.42674348e-10),
    (0, 1, 2, 0, 1.54547250e-4),
    (1, 1, 2, 0, 5.24110970e-6),
    (2, 1, 2, 0, -8.75874982e-8),
    (3, 1, 2, 0, -1.50743064e-9),
    (0, 2, 2, 0, -1.56236307e-5),
    (1, 2, 2, 0, -1.33895614e-7),
    (2, 2, 2, 0, 2.49709824e-9),
    (0, 3, 2, 0, 6.51711721e-7),
    (1, 3, 2, 0, 1.94960053e-9),
    (0, 4, 2, 0, -1.00361113e-8),
    (0, 0, 3, 0, -1.21206673e-5),
    (1, 0, 3, 0, -2.18203660e-7),
    (2, 0, 3, 0, 7.51269482e-9),
    (3, 0, 3, 0, 9.79063848e-11),
    (0, 1, 3, 0, 1.25006734e-6),
    (1, 1, 3, 0, -1.81584736e-9),
    (2, 1, 3, 0, -3.52197671e-10),
    (0, 2, 3, 0, -3.36514630e-8),
    (1, 2, 3, 0, 1.35908359e-10),
    (0, 3, 3, 0, 4.17032620e-10),
    (0, 0, 4, 0, -1.30369025e-9),
    (1, 0, 4, 0, 4.13908461e-10),
    (2, 0, 4, 0, 9.22652254e-12),
    (0, 1, 4, 0, -5.08220384e-9),
    (1, 1, 4, 0, -2.24730961e-11),
    (0, 2, 4, 0, 1.17139133e-10),
    (0, 0, 5, 0, 6.62154879e-10),
    (1, 0, 5, 0, 4.03863260e-13),
    (0, 1, 5, 0, 1.95087203e-12),
    (0, 0, 6, 0, -4.73602469e-12),
    (0, 0, 0, 1, 5.12733497),
    (1, 0, 0, 1, -0.312788561),
    (2, 0, 0, 1, -0.0196701861),
    (3, 0, 0, 1, 9.99690870e-4),
    (4, 0, 0, 1, 9.51738512e-6),
    (5, 0, 0, 1, -4.66426341e-7),
    (0, 1, 0, 1, 0.548050612),
    (1, 1, 0, 1, -0.00330552823),
    (2, 1, 0, 1, -0.00164119440),
    (3, 1, 0, 1, -5.16670694e-6),
    (4, 1, 0, 1, 9.52692432e-7),
    (0, 2, 0, 1, -0.0429223622),
    (1, 2, 0, 1, 0.00500845667),
    (2, 2, 0, 1, 1.00601257e-6),
    (3, 2, 0, 1, -1.81748644e-6),
    (0, 3, 0, 1, -1.25813502e-3),
    (1, 3, 0, 1, -1.79330391e-4),
    (2, 3, 0, 1, 2.34994441e-6),
    (0, 4, 0, 1, 1.29735808e-4),
    (1, 4, 0, 1, 1.29064870e-6),
    (0, 5, 0, 1, -2.28558686e-6),
    (0, 0, 1, 1, -0.0369476348),
    (1, 0, 1, 1, 0.00162325322),
    (2, 0, 1, 1, -3.14279680e-5),
    (3, 0, 1, 1, 2.59835559e-6),
    (4, 0, 1, 1, -4.77136523e-8),
    (0, 1, 1, 1, 8.64203390e-3),
    (1, 1, 1, 1, -6.87405181e-4),
    (2, 1, 1, 1, -9.13863872e-6),
    (3, 1, 1, 1, 5.15916806e-7),
    (0, 2, 1, 1, -3.59217476e-5),
    (1, 2, 1, 1, 3.28696511e-5),
    (2, 2, 1, 1, -7.10542454e-7),
    (0, 3, 1, 1, -1.24382300e-5),
    (1, 3, 1, 1, -7.38584400e-9),
    (0, 4, 1, 1, 2.20609296e-7),
    (0, 0, 2, 1, -7.32469180e-4),
    (1, 0, 2, 1, -1.87381964e-5),
    (2, 0, 2, 1, 4.80925239e-6),
    (3, 0, 2, 1, -8.75492040e-8),
    (0, 1, 2, 1, 2.77862930e-5),
    (1, 1, 2, 1, -5.06004592e-6),
    (2, 1, 2, 1, 1.14325367e-7),
    (0, 2, 2, 1, 2.53016723e-6),
    (1, 2, 2, 1, -1.72857035e-8),
    (0, 3, 2, 1, -3.95079398e-8),
    (0, 0, 3, 1, -3.59413173e-7),
    (1, 0, 3, 1, 7.04388046e-7),
    (2, 0, 3, 1, -1.89309167e-8),
    (0, 1, 3, 1, -4.79768731e-7),
    (1, 1, 3, 1, 7.96079978e-9),
    (0, 2, 3, 1, 1.62897058e-9),
    (0, 0, 4, 1, 3.94367674e-8),
    (1, 0, 4, 1, -1.18566247e-9),
    (0, 1, 4, 1, 3.34678041e-10),
    (0, 0, 5, 1, -1.15606447e-10),
    (0, 0, 0, 2, -2.80626406),
    (1, 0, 0, 2, 0.548712484),
    (2, 0, 0, 2, -0.00399428410),
    (3, 0, 0, 2, -9.54009191e-4),
    (4, 0, 0, 2, 1.93090978e-5),
    (0, 1, 0, 2, -0.308806365),
    (1, 1, 0, 2, 0.0116952364),
    (2, 1, 0, 2, 4.95271903e-4),
    (3, 1, 0, 2, -1.90710882e-5),
    (0, 2, 0, 2, 0.00210787756),
    (1, 2, 0, 2, -6.98445738e-4),
    (2, 2, 0, 2, 2.30109073e-5),
    (0, 3, 0, 2, 4.17856590e-4),
    (1, 3, 0, 2, -1.27043871e-5),
    (0, 4, 0, 2, -3.04620472e-6),
    (0, 0, 1, 2, 0.0514507424),
    (1, 0, 1, 2, -0.00432510997),
    (2, 0, 1, 2, 8.99281156e-5),
    (3, 0, 1, 2, -7.14663943e-7),
    (0, 1, 1, 2, -2.66016305e-4),
    (1, 1, 1, 2, 2.63789586e-4),
    (2, 1, 1, 2, -7.01199003e-6),
    (0, 2, 1, 2, -1.06823306e-4),
    (1, 2, 1, 2, 3.61341136e-6),
    (0, 3, 1, 2, 2.29748967e-7),
    (0, 0, 2, 2, 3.04788893e-4),
    (1, 0, 2, 2, -6.42070836e-5),
    (2, 0, 2, 2, 1.16257971e-6),
    (0, 1, 2, 2, 7.68023384e-6),
    (1, 1, 2, 2, -5.47446896e-7),
    (0, 2, 2, 2, -3.59937910e-8),
    (0, 0, 3, 2, -4.36497725e-6),
    (1, 0, 3, 2, 1.68737969e-7),
    (0, 1, 3, 2, 2.67489271e-8),
    (0, 0, 4, 2, 3.23926897e-9),
    (0, 0, 0, 3, -0.0353874123),
    (1, 0, 0, 3, -0.221201190),
    (2, 0, 0, 3, 0.0155126038),
    (3, 0, 0, 3, -2.63917279e-4),
    (0, 1, 0, 3, 0.0453433455),
    (1, 1, 0, 3, -0.00432943862),
    (2, 1, 0, 3, 1.45389826e-4),
    (0, 2, 0, 3, 2.17508610e-4),
    (1, 2, 0, 3, -6.66724702e-5),
    (0, 3, 0, 3, 3.33217140e-5),
    (0, 0, 1, 3, -0.00226921615),
    (1, 0, 1, 3, 3.80261982e-4),
    (2, 0, 1, 3, -5.45314314e-9),
    (0, 1, 1, 3, -7.96355448e-4),
    (1, 1, 1, 3, 2.53458034e-5),
    (0, 2, 1, 3, -6.31223658e-6),
    (0, 0, 2, 3, 3.02122035e-4),
    (1, 0, 2, 3, -4.77403547e-6),
    (0, 1, 2, 3, 1.73825715e-6),
    (0, 0, 3, 3, -4.09087898e-7),
    (0, 0, 0, 4, 0.614155345),
    (1, 0, 0, 4, -0.0616755931),
    (2, 0, 0, 4, 0.00133374846),
    (0, 1, 0, 4, 0.00355375387),
    (1, 1, 0, 4, -5.13027851e-4),
    (0, 2, 0, 4, 1.02449757e-4),
    (0, 0, 1, 4, -0.00148526421),
    (1, 0, 1, 4, -4.11469183e-5),
    (0, 1, 1, 4, -6.80434415e-6),
    (0, 0, 2, 4, -9.77675906e-6),
    (0, 0, 0, 5, 0.0882773108),
    (1, 0, 0, 5, -0.00301859306),
    (0, 1, 0, 5, 0.00104452989),
    (0, 0, 1, 5, 2.47090539e-4),
    (0, 0, 0, 6, 0.00148348065),
)

_EXPECTED_SHA256 = "dc8479fe7c203ec7846b3fa3911e12f413ad1ece0c388206e6ef289a584477c2"


def _canonical_text() -> str:
    return ';'.join(
        '{},{},{},{},{}'.format(i, j, k, l, repr(c))
        for i, j, k, l, c in UTCI_POLYNOMIAL_TERMS
    )


def verify_table() -> None:
    """Raise RuntimeError if the coefficient table was altered."""
    digest = hashlib.sha256(_canonical_text().encode()).hexdigest()
    if digest != _EXPECTED_SHA256:
        raise RuntimeError("UTCI coefficient table failed its integrity check")


verify_table()
