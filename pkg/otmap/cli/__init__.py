"""
CLI — ``otmap`` 命令行入口。

Quick Start::

    $ otmap gen-data --n 200 --d 5 --q 1 --out data/
    $ otmap fit-fourier --x data/x.csv --y data/y.csv --q 1 --out runs/fourier/
    $ otmap study --estimator nn --q 1 --d 50 --ns 50,100,200,500,1000 --seeds 3 --out report.json
"""

from otmap.cli.main import build_parser, main, run

__all__ = ["build_parser", "main", "run"]
