"""Numerical workbench for model operators, vessels and transfer functions on
compact real Riemann surfaces of genus 0 and 1."""

__version__ = "0.1.0"
