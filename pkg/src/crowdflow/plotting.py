"""Gnuplot script for the files written by ``crowdflow compare``."""

from __future__ import annotations

from .io import snapshot_name


def figure_script(dim: int, times) -> str:
    """Return a gnuplot script that renders the comparison figures to PNG.

    Run it from the output directory with ``gnuplot figures.gp``.
    """
    lines = [
        "# crowdflow comparison figures",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        "",
        "set output 'mass.png'",
        "set xlabel 't'; set ylabel 'mass'",
        "plot 'hughes/mass.csv' using 1:2 with lines title 'hughes', \\",
        "     'mfg/mass.csv' using 1:2 with lines title 'mfg'",
        "",
    ]
    prefix = "rho" if dim == 1 else "rho_center"
    xlabel = "x" if dim == 1 else "x (y = centre)"
    for t in times:
        name = snapshot_name(prefix, t)
        png = name[:-4] + ".png"
        lines += [
            f"set output '{png}'",
            f"set xlabel '{xlabel}'; set ylabel 'rho'; set title 't = {t:g}'",
            f"plot 'hughes/{name}' using 1:2 with lines title 'hughes', \\",
            f"     'mfg/{name}' using 1:2 with lines title 'mfg'",
            "",
        ]
    return "\n".join(lines)
