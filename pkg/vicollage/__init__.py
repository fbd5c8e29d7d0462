__all__ = [
    "errors",
    "config",
    "pwpoly",
    "basis",
    "state",
    "assembly",
    "galerkin",
    "inverse",
    "runconfig",
    "commands",
    "cli",
]
