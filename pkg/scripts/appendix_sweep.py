"""Entropy slope for 3n inverted oscillators with a linear frequency spectrum.

For each n, draws 3n frequencies and fits both the continuum form (slope
(3/2) n xi Omega) and the discrete product form (slope Omega + 3n max w).
"""
import argparse

from igdyn.ige import ige_iho_appendix, sample_frequency_spectrum


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[1, 2, 4, 8])
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()
    print("n  Omega     continuum/(n xi Omega)  discrete slope  discrete predicted  doubled/base")
    for n in args.n:
        freqs = sample_frequency_spectrum(n, args.seed)
        cont = ige_iho_appendix(n, freqs, form="continuum")
        disc = ige_iho_appendix(n, freqs, form="discrete")
        doubled = ige_iho_appendix(n, 2 * freqs, form="discrete")
        print(f"{n:<2d} {cont.extras['Omega']:.5f}   {cont.extras['slope_over_n_xi_Omega']:.5f}"
              f"                 {disc.fitted_slope:.5f}         {disc.predicted_slope:.5f}"
              f"             {doubled.fitted_slope / disc.fitted_slope:.5f}")


if __name__ == "__main__":
    main()
