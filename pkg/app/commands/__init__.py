"""
Sub-commands of the dualbell CLI, one module each.

Every module exposes ``register(subparsers, parents)`` and ``run(args) -> CommandOutput``:
  - dvalue      → D, the four E terms and the trace condition of setting files
  - classify    → Separable / Entangled / Inconclusive verdict with evidence
  - maximize    → closed-form and seesaw maxima of D for an effect
  - simulate    → shot-based estimate of D with noise, per-setting counts, histogram CSV
  - teleport    → maximal average fidelity and per-outcome dual CHSH link of a POVM
  - renormalize → rescaled observable satisfying the trace condition
"""

from app.commands import classify, dvalue, maximize, renormalize, simulate, teleport

COMMANDS = {
    "dvalue": dvalue,
    "classify": classify,
    "maximize": maximize,
    "simulate": simulate,
    "teleport": teleport,
    "renormalize": renormalize,
}
