#!/usr/bin/env python3
"""Writes the synthetic 10-zone North-European instance used by the tests.

Usage: make_synthetic.py <out_dir> [--seed N] [--year Y] [--hours-per-season H] [--scenarios W]
"""
import argparse
import csv
import math
import os
import random
from datetime import datetime, timedelta, timezone

ZONES = [
    # id, country, mean demand MW
    ("NO1", "NO", 4200),
    ("NO2", "NO", 3600),
    ("NO3", "NO", 2900),
    ("NO4", "NO", 2100),
    ("NO5", "NO", 2000),
    ("DE", "DE", 58000),
    ("DK", "DK", 3900),
    ("NL", "NL", 13000),
    ("AT", "AT", 7400),
    ("FR", "FR", 54000),
]

LINES = [
    # id, from, to, MW
    ("NO1-NO2", "NO1", "NO2", 3500),
    ("NO1-NO3", "NO1", "NO3", 500),
    ("NO1-NO5", "NO1", "NO5", 600),
    ("NO2-NO5", "NO2", "NO5", 600),
    ("NO3-NO4", "NO3", "NO4", 900),
    ("NO3-NO5", "NO3", "NO5", 500),
    ("NO2-DK", "NO2", "DK", 1700),
    ("NO2-NL", "NO2", "NL", 700),
    ("DK-DE", "DK", "DE", 2500),
    ("NL-DE", "NL", "DE", 5000),
    ("DE-AT", "DE", "AT", 7000),
    ("DE-FR", "DE", "FR", 8000),
    ("FR-AT", "FR", "AT", 0),
]
CANDIDATE = ("NO2-DE", "NO2", "DE", 0)
CANDIDATE_COST = 65000.0  # EUR/MW/yr, annualised

SEASONS = ["winter", "spring", "summer", "autumn"]
WATER_VALUE = {"winter": 42.0, "spring": 30.0, "summer": 18.0, "autumn": 34.0}
GAS = {"winter": 62.0, "spring": 55.0, "summer": 50.0, "autumn": 58.0}

# id, node, MW, season-cost table or constant, cost slope EUR/MWh per MW
GENERATORS = []
for z, _, dem in ZONES[:5]:
    GENERATORS.append((f"HYD_{z}", z, round(1.6 * dem), WATER_VALUE, 4.0 / dem))
GENERATORS += [
    ("LIG_DE", "DE", 24000, 22.0, 0.0004),
    ("COAL_DE", "DE", 28000, 38.0, 0.0008),
    ("GAS_DE", "DE", 30000, GAS, 0.0012),
    ("GAS_DK", "DK", 3500, GAS, 0.004),
    ("GAS_NL", "NL", 14000, GAS, 0.002),
    ("NUC_FR", "FR", 44000, 12.0, 0.0003),
    ("GAS_FR", "FR", 14000, GAS, 0.002),
    ("HYD_AT", "AT", 6000, WATER_VALUE, 0.002),
    ("GAS_AT", "AT", 5000, GAS, 0.004),
]

RENEWABLES = [
    # id, node, MW, kind
    ("WIND_DE", "DE", 55000, "wind"),
    ("SOLAR_DE", "DE", 45000, "solar"),
    ("WIND_DK", "DK", 5500, "wind"),
    ("WIND_NL", "NL", 5000, "wind"),
]

# Seasonal inflow budget as a share of running flat out.
INFLOW_RANGE = (0.85, 1.35)
HYDRO_ENERGY_SHARE = {"winter": 0.85, "spring": 0.8, "summer": 0.85, "autumn": 0.8}


def season(ts):
    m = ts.month
    if m in (12, 1, 2):
        return "winter"
    if m <= 5:
        return "spring"
    if m <= 8:
        return "summer"
    return "autumn"


def cost_of(c, s):
    return c[s] if isinstance(c, dict) else c


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=2019)
    ap.add_argument("--year", type=int, default=2019)
    ap.add_argument("--hours-per-season", type=int, default=24, help="must match hours_per_season in config.txt")
    ap.add_argument("--scenarios", type=int, default=30, help="must match n_scenarios in config.txt")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)

    def writer(name, header):
        f = open(os.path.join(args.out, name), "w", newline="")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        return f, w

    f, w = writer("nodes.csv", ["node_id", "country"])
    for z, c, _ in ZONES:
        w.writerow([z, c])
    f.close()

    f, w = writer("lines.csv", ["line_id", "from", "to", "f_max_mw", "inv_cost_eur_per_mw_yr", "expandable"])
    for lid, a, b, cap in LINES:
        w.writerow([lid, a, b, cap, 0, 0])
    w.writerow([CANDIDATE[0], CANDIDATE[1], CANDIDATE[2], CANDIDATE[3], CANDIDATE_COST, 1])
    f.close()

    f, w = writer("generators.csv", ["gen_id", "node_id", "g_max_mw", "inv_cost_eur_per_mw_yr", "expandable", "cost_slope"])
    for gid, node, cap, _, slope in GENERATORS:
        w.writerow([gid, node, cap, 0, 0, f"{slope:.6g}"])
    f.close()

    f, w = writer("gen_costs.csv", ["gen_id", "season", "marg_cost_eur_per_mwh"])
    for gid, _, _, cost, _ in GENERATORS:
        for s in SEASONS:
            w.writerow([gid, s, cost_of(cost, s)])
    f.close()

    # Nordic inflow is drawn once per scenario (wet and dry years) and shared
    # by all Norwegian zones; other hydro gets the seasonal budget.
    f, w = writer("gen_energy_limits.csv", ["gen_id", "scenario", "season", "q_max_mwh"])
    hours = args.hours_per_season
    inflow_rng = random.Random(args.seed + 1)
    inflow = [inflow_rng.uniform(*INFLOW_RANGE) for _ in range(args.scenarios)]
    for gid, node, cap, _, _ in GENERATORS:
        if not gid.startswith("HYD_"):
            continue
        for s in SEASONS:
            budget = HYDRO_ENERGY_SHARE[s] * cap * hours
            if node.startswith("NO"):
                for k, v in enumerate(inflow):
                    w.writerow([gid, k, s, round(v * budget)])
            else:
                w.writerow([gid, "*", s, round(budget)])
    f.close()

    f, w = writer("renewables.csv", ["ren_id", "node_id", "g_r_mw", "inv_cost_eur_per_mw_yr", "expandable"])
    for rid, node, cap, _ in RENEWABLES:
        w.writerow([rid, node, cap, 0, 0])
    f.close()

    # Hourly series: demand with daily and seasonal shape, wind as an AR(1)
    # process shared in part across zones, prices loosely tied to residual load.
    start = datetime(args.year, 1, 1, tzinfo=timezone.utc)
    n_hours = (datetime(args.year + 1, 1, 1, tzinfo=timezone.utc) - start) // timedelta(hours=1)
    common_wind = 0.0
    local_wind = {r[0]: 0.0 for r in RENEWABLES if r[3] == "wind"}
    cloud = 0.0
    weather = {z: 0.0 for z, _, _ in ZONES}
    f, w = writer("timeseries.csv", ["timestamp_iso8601", "node_id", "price_eur_mwh", "demand_mw"]
                  + [f"{r[0]}:factor" for r in RENEWABLES])
    for h in range(n_hours):
        ts = start + timedelta(hours=h)
        s = season(ts)
        doy = ts.timetuple().tm_yday
        hod = ts.hour
        common_wind = 0.97 * common_wind + rng.gauss(0.0, 0.25)
        for k in local_wind:
            local_wind[k] = 0.9 * local_wind[k] + rng.gauss(0.0, 0.2)
        cloud = 0.95 * cloud + rng.gauss(0.0, 0.2)
        winter_peak = math.cos(2 * math.pi * (doy - 15) / 365.0)
        factors = {}
        for rid, _, _, kind in RENEWABLES:
            if kind == "wind":
                x = 0.3 + 0.08 * winter_peak + 0.18 * common_wind + 0.1 * local_wind[rid]
            else:
                elev = math.sin(math.pi * (hod - 5) / 15.0) if 5 <= hod <= 20 else 0.0
                x = elev * (0.55 - 0.25 * winter_peak) * (1.0 - 0.3 * max(0.0, cloud))
            factors[rid] = min(1.0, max(0.0, x))
        daily = 0.08 * math.sin(math.pi * (hod - 6) / 12.0) if 6 <= hod <= 22 else -0.1
        wind_de = factors["WIND_DE"]
        for z, c, dem in ZONES:
            weather[z] = 0.98 * weather[z] + rng.gauss(0.0, 0.01)
            seasonal = (0.25 if c == "NO" else 0.1) * winter_peak
            d = dem * (1.0 + seasonal + daily + weather[z])
            if c == "NO":
                p = WATER_VALUE[s] * (1.0 + 0.15 * weather[z] / 0.05) + 2.0 * rng.gauss(0.0, 1.0)
            else:
                p = GAS[s] * (0.9 + daily) - 35.0 * wind_de - 20.0 * factors["SOLAR_DE"]
                p += 3.0 * rng.gauss(0.0, 1.0)
            p = max(p, 1.0)
            w.writerow([ts.strftime("%Y-%m-%dT%H:%M:%SZ"), z, f"{p:.2f}", f"{d:.1f}"]
                       + [f"{factors[r[0]]:.4f}" for r in RENEWABLES])
    f.close()


if __name__ == "__main__":
    main()
