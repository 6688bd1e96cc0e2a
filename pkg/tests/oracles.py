"""Reference values computed once with mpmath at 30 significant digits and
frozen here. ``test_oracles.py`` recomputes them when mpmath is available."""

# kappa_A = 1, phi_A = -1, d = 1: 1 - (sqrt(pi)/2) erf(1)
U_A_UNIT = 0.253175867187572974600532563868
# kappa_R = 2, phi_R = 0.5, d = 2: -2 (sqrt(pi) / (2 sqrt(0.5))) erf(sqrt(2))
U_R_2 = -2.39257602664521640586284754095
# 1 - e^-1
ONE_MINUS_INV_E = 0.632120558828557678404476229839
# 2 e^-0.5
TWO_EXP_HALF = 1.21306131942526684720759906998
