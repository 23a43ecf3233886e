"""Generate benchmark plots from results.db."""

import sqlite3
from pathlib import Path

import matplotlib.pyplot as plt


METHOD_STYLES = {
    'lapack': {'color': 'C0', 'linestyle': '-', 'marker': 'o'},
    'bisection': {'color': 'C1', 'linestyle': '--', 'marker': 's'},
    'dense': {'color': 'C2', 'linestyle': '-.', 'marker': '^'},
    'circulant': {'color': 'C3', 'linestyle': ':', 'marker': 'D'},
    'symbol': {'color': 'C4', 'linestyle': '-', 'marker': 'v'},
}


def query_results(conn, method, band_width, column='time_ms'):
    cursor = conn.execute(
        f'''SELECT n, {column}
           FROM radius
           WHERE method = ? AND band_width = ?
           ORDER BY n''',
        (method, band_width),
    )
    rows = cursor.fetchall()
    if not rows:
        return [], []
    sizes, values = zip(*rows)
    return list(sizes), list(values)


def plot_timing():
    """Plot time per spectral radius evaluation vs trial length, one panel per band width."""
    out_dir = Path(__file__).parent
    conn = sqlite3.connect(out_dir / 'results.db')

    methods = [r[0] for r in conn.execute('SELECT DISTINCT method FROM radius')]
    widths = [r[0] for r in conn.execute('SELECT DISTINCT band_width FROM radius ORDER BY band_width')]

    fig, axes = plt.subplots(1, len(widths), figsize=(6 * len(widths), 5))
    if len(widths) == 1:
        axes = [axes]

    for ax, width in zip(axes, widths):
        for method in methods:
            sizes, times = query_results(conn, method, width)
            if not sizes:
                continue
            style = METHOD_STYLES.get(method, {'linestyle': '-', 'marker': 'o'})
            ax.plot(sizes, times, label=method, markersize=6, **style)

        ax.set_xlabel('Trial length n')
        ax.set_ylabel('Time (ms)')
        ax.set_title(f'Spectral radius, band half-width r = {width}')
        ax.set_xscale('log')
        ax.set_yscale('log')
        ax.legend(fontsize=8, loc='best')
        ax.grid(True, alpha=0.3)

    plt.tight_layout()
    plt.savefig(out_dir / 'benchmark_timing.png', dpi=150)
    print(f'Saved {out_dir / "benchmark_timing.png"}')
    conn.close()


def plot_gap():
    """Plot how far each route's value sits below the symbol sup as n grows."""
    out_dir = Path(__file__).parent
    conn = sqlite3.connect(out_dir / 'results.db')

    widths = [r[0] for r in conn.execute('SELECT DISTINCT band_width FROM radius ORDER BY band_width')]

    fig, axes = plt.subplots(1, len(widths), figsize=(6 * len(widths), 5))
    if len(widths) == 1:
        axes = [axes]

    for ax, width in zip(axes, widths):
        sup_sizes, sups = query_results(conn, 'symbol', width, 'value')
        if not sup_sizes:
            continue
        sup = max(sups)
        for method in ('lapack', 'circulant'):
            sizes, values = query_results(conn, method, width, 'value')
            if not sizes:
                continue
            gaps = [max(sup - v, 1e-17) for v in values]
            ax.plot(sizes, gaps, label=method, markersize=6, **METHOD_STYLES[method])

        ax.set_xlabel('Trial length n')
        ax.set_ylabel('symbol sup - radius')
        ax.set_title(f'Gap to the symbol sup, r = {width}')
        ax.set_xscale('log')
        ax.set_yscale('log')
        ax.legend(fontsize=9, loc='best')
        ax.grid(True, alpha=0.3)

    plt.tight_layout()
    plt.savefig(out_dir / 'benchmark_gap.png', dpi=150)
    print(f'Saved {out_dir / "benchmark_gap.png"}')
    conn.close()


def plot_scaling():
    """Plot wall time of the zero-padding sweep against the thread count."""
    out_dir = Path(__file__).parent
    conn = sqlite3.connect(out_dir / 'results.db')

    rows = conn.execute('SELECT threads, max_n, time_ms FROM sweep ORDER BY max_n, threads').fetchall()
    conn.close()
    if not rows:
        print('No sweep results found')
        return

    fig, ax = plt.subplots(figsize=(6, 5))
    colors = ['C0', 'C1', 'C2', 'C3', 'C4']
    for i, max_n in enumerate(sorted({r[1] for r in rows})):
        # auto (0) goes last
        points = sorted((r for r in rows if r[1] == max_n), key=lambda r: (r[0] == 0, r[0]))
        labels = ['auto' if t == 0 else str(t) for t, _, _ in points]
        ax.plot(range(len(points)), [r[2] for r in points], color=colors[i % len(colors)],
                marker='o', linewidth=2, markersize=8, label=f'n up to {max_n}')
        ax.set_xticks(range(len(points)))
        ax.set_xticklabels(labels)

    ax.set_xlabel('Threads')
    ax.set_ylabel('Time (ms)')
    ax.set_title('Zero-padding sweep: thread scaling')
    ax.legend(fontsize=9, loc='best')
    ax.grid(True, alpha=0.3)

    plt.tight_layout()
    plt.savefig(out_dir / 'benchmark_scaling.png', dpi=150)
    print(f'Saved {out_dir / "benchmark_scaling.png"}')


def print_summary():
    out_dir = Path(__file__).parent
    conn = sqlite3.connect(out_dir / 'results.db')

    print('\n' + '=' * 60)
    print('Benchmark Summary')
    print('=' * 60)
    cursor = conn.execute(
        '''SELECT method, band_width, MAX(n), AVG(time_ms)
           FROM radius
           GROUP BY method, band_width
           ORDER BY band_width, AVG(time_ms)''',
    )
    print(f'{"Method":<12} {"r":<4} {"Max n":<8} {"Avg time (ms)":>14}')
    for method, width, max_n, avg_ms in cursor.fetchall():
        print(f'{method:<12} {width:<4} {max_n:<8} {avg_ms:>14.3f}')
    conn.close()


if __name__ == '__main__':
    plot_timing()
    plot_gap()
    plot_scaling()
    print_summary()
