"""Synthetic 13-country panel in the layouts the loaders expect.

These numbers are NOT historical GDP. They stand in for the Maddison
(pre-1950, wide) and Total Economy Database (post-1950, long) series when the
real files are not at hand. Each country gets a constant mean increment per
era plus noise: Laplace noise before 1941, Gaussian noise with occasional
large shocks after 1950. Parameters are drawn once from a fixed seed.

    python3 generate.py        # rewrites pre_wide.csv and post_long.csv
"""

from pathlib import Path

import numpy as np

SEED = 1870_1950
CODES = ["AUS", "AUT", "BEL", "CAN", "FRA", "ITA", "JPN", "NLD", "ESP", "SWE", "CHE", "GBR", "USA"]
# countries whose wide column is blank for the war years 1941-1949
WAR_GAPS = {"AUT", "BEL", "FRA", "ITA", "JPN", "NLD"}

PRE_YEARS = np.arange(1870, 1950)
POST_YEARS = np.arange(1950, 2012)

PRE_START = (2000.0, 5000.0)
PRE_MEAN_INC = (10.0, 60.0)
PRE_LAPLACE_SCALE = (40.0, 110.0)
POST_START = (4000.0, 10000.0)
POST_MEAN_INC = (150.0, 450.0)
POST_SIGMA = (150.0, 280.0)
SHOCK_PROB = 0.025
SHOCK_SIGMA = 900.0
FLOOR = 300.0


def walk(rng, start, increments):
    levels = [start]
    for d in increments:
        levels.append(max(FLOOR, levels[-1] + d))
    return np.array(levels)


def main():
    rng = np.random.default_rng(SEED)
    here = Path(__file__).resolve().parent
    pre = {}
    post = {}
    for code in CODES:
        g0 = rng.uniform(*PRE_START)
        a = rng.uniform(*PRE_MEAN_INC)
        b = rng.uniform(*PRE_LAPLACE_SCALE)
        pre[code] = walk(rng, g0, a + rng.laplace(0.0, b, len(PRE_YEARS) - 1))

        g1 = rng.uniform(*POST_START)
        a = rng.uniform(*POST_MEAN_INC)
        s = rng.uniform(*POST_SIGMA)
        noise = rng.normal(0.0, s, len(POST_YEARS) - 1)
        shocks = rng.random(len(POST_YEARS) - 1) < SHOCK_PROB
        noise[shocks] += rng.normal(0.0, SHOCK_SIGMA, shocks.sum())
        post[code] = walk(rng, g1, a + noise)

    with open(here / "pre_wide.csv", "w") as f:
        f.write("year," + ",".join(CODES) + "\n")
        for i, year in enumerate(PRE_YEARS):
            cells = []
            for code in CODES:
                if year > 1940 and code in WAR_GAPS:
                    cells.append("")
                else:
                    cells.append(f"{pre[code][i]:.1f}")
            f.write(f"{year}," + ",".join(cells) + "\n")

    with open(here / "post_long.csv", "w") as f:
        f.write("country,year,gdp_pc\n")
        for code in CODES:
            for i, year in enumerate(POST_YEARS):
                f.write(f"{code},{year},{post[code][i]:.1f}\n")


if __name__ == "__main__":
    main()
