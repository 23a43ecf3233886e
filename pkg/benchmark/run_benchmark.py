"""Benchmark the spectral radius routes and the threaded zero-padding sweep.

Run with: python benchmark/run_benchmark.py
         python benchmark/run_benchmark.py --large
         python benchmark/run_benchmark.py --sizes 100 1000 5000 --methods lapack bisection
"""

import argparse
import sqlite3
import time
from pathlib import Path

import numpy as np
import scipy.linalg

import sbt_ilc
from sbt_ilc import eigen

# Trial length presets
SIZES_SMALL = [10, 30, 100, 300, 1000, 3000]
SIZES_LARGE = [1000, 3000, 10000, 30000, 100000]

# Band of the padded transition for the example plant with alpha = 0.45
EXAMPLE_NUM = [0.0, 1.0, -1.1]
EXAMPLE_DEN = [1.0, 0.2, -0.0125]
EXAMPLE_ALPHA = 0.45


def main():
    parser = argparse.ArgumentParser(description='Benchmark sbt_ilc stability certificates')
    parser.add_argument('--db', default='results.db', help='SQLite database file')
    parser.add_argument(
        '--methods',
        nargs='+',
        choices=['lapack', 'bisection', 'dense', 'circulant', 'symbol'],
        default=['lapack', 'bisection', 'dense', 'symbol'],
    )
    parser.add_argument('--large', action='store_true', help='Run large trial lengths (1e3-1e5)')
    parser.add_argument('--sizes', nargs='+', type=int, help='Custom trial lengths')
    parser.add_argument('--lowpass', type=int, default=8,
                        help='Half-order of the Q_u lowpass, which sets the band width (default: 8)')
    parser.add_argument('--no-sweep', action='store_true', help='Skip the threaded sweep benchmark')
    args = parser.parse_args()

    out_dir = Path(__file__).parent
    conn = init_db(out_dir / args.db)

    if args.sizes:
        sizes = args.sizes
    elif args.large:
        sizes = SIZES_LARGE
    else:
        sizes = SIZES_SMALL

    fp = sbt_ilc.factor_plant(sbt_ilc.RationalPlant(EXAMPLE_NUM, EXAMPLE_DEN))
    q_u = sbt_ilc.ZeroPhaseFilter.lowpass(args.lowpass, 0.5)
    q_e = sbt_ilc.ZeroPhaseFilter.identity()
    band = sbt_ilc.band_coefficients(fp, EXAMPLE_ALPHA, q_u, q_e)
    print(f'Band half-width r = {band.size - 1}, symbol sup = {sbt_ilc.hinf_check(band).sup:.6f}')

    print(f'\n{"=" * 60}')
    print('Benchmarking: spectral radius')
    print(f'{"=" * 60}')
    results = run_radius_benchmarks(band, sizes, args.methods)
    print_results_table(results, args.methods)
    for r in results:
        for method in args.methods:
            if method in r:
                conn.execute(
                    '''INSERT OR REPLACE INTO radius
                       (method, band_width, n, time_ms, value)
                       VALUES (?, ?, ?, ?, ?)''',
                    (method, band.size - 1, r['n'], r[method], r[method + '_value']),
                )
    conn.commit()

    if not args.no_sweep:
        print(f'\n{"=" * 60}')
        print('Benchmarking: zero-padding sweep')
        print(f'{"=" * 60}')
        sweep_sizes = [n for n in sizes if n <= 1000] or sizes[:1]
        for threads in [1, 2, 4, 8, 0]:
            timing = benchmark_sweep(fp, q_u, q_e, sweep_sizes, threads)
            t_label = 'auto' if threads == 0 else threads
            print(f'  t={t_label}: {timing:.0f} ms')
            conn.execute(
                '''INSERT OR REPLACE INTO sweep (threads, max_n, time_ms) VALUES (?, ?, ?)''',
                (threads, max(sweep_sizes), timing),
            )
        conn.commit()

    conn.close()
    print(f'\nSaved results to {out_dir / args.db}')


def radius_function(method):
    """A callable band, n -> spectral radius (or its approximation) for each route."""
    if method == 'lapack':
        return lambda band, n: eigen.spectral_radius_lapack(sbt_ilc.SBTMatrix(band, n))
    if method == 'bisection':
        return lambda band, n: eigen.spectral_radius_bisection(sbt_ilc.SBTMatrix(band, n))
    if method == 'dense':
        return lambda band, n: float(np.max(np.abs(scipy.linalg.eigvalsh(
            sbt_ilc.SBTMatrix(band, n).todense()))))
    if method == 'circulant':
        return lambda band, n: float(np.max(np.abs(sbt_ilc.circulant_eigenvalues(band, n))))
    if method == 'symbol':
        return lambda band, n: sbt_ilc.hinf_check(band, max(n, 2)).sup
    raise ValueError(method)


def run_radius_benchmarks(band, sizes, methods):
    results = []
    for n in sizes:
        timings = {'n': n}
        n_iter = max(1, min(20, 20000 // n))
        for method in methods:
            # Dense eigensolvers and the Householder reduction for r > 1 are cubic
            if method == 'dense' and n > 5000:
                continue
            if method == 'bisection' and band.size > 2 and n > 5000:
                continue
            if method == 'circulant' and n < 2 * band.size - 1:
                continue
            fn = radius_function(method)
            value = fn(band, n)  # warmup

            start = time.perf_counter()
            for _ in range(n_iter):
                fn(band, n)
            elapsed = time.perf_counter() - start

            timings[method] = elapsed / n_iter * 1000
            timings[method + '_value'] = value
        results.append(timings)
        print(f'  n={n}: ' + ', '.join(
            f'{m}={timings[m + "_value"]:.9f}' for m in methods if m in timings))
    return results


def benchmark_sweep(fp, q_u, q_e, sizes, threads):
    start = time.perf_counter()
    sbt_ilc.zero_padding_sweep(fp, EXAMPLE_ALPHA, q_u, q_e, sizes, threads=threads)
    return (time.perf_counter() - start) * 1000


def print_results_table(results, methods):
    headers = ['n'] + [f'{m} (ms)' for m in methods]
    print('\n' + ' | '.join(f'{h:>14}' for h in headers))
    print('-' * (17 * len(headers)))
    for r in results:
        row = [f"{r['n']:>14}"]
        for method in methods:
            if method in r:
                row.append(f'{r[method]:>14.3f}')
            else:
                row.append(f'{"N/A":>14}')
        print(' | '.join(row))


def init_db(db_path):
    """Initialize SQLite database."""
    conn = sqlite3.connect(db_path)
    conn.execute('''
        CREATE TABLE IF NOT EXISTS radius (
            method TEXT,
            band_width INTEGER,
            n INTEGER,
            time_ms REAL,
            value REAL,
            PRIMARY KEY (method, band_width, n)
        )
    ''')
    conn.execute('''
        CREATE TABLE IF NOT EXISTS sweep (
            threads INTEGER,
            max_n INTEGER,
            time_ms REAL,
            PRIMARY KEY (threads, max_n)
        )
    ''')
    conn.commit()
    return conn


if __name__ == '__main__':
    main()
