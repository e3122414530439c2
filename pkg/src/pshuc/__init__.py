"""Unit commitment with pumped-storage hydro: three MILP formulations."""
