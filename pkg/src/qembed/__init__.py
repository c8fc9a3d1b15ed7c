"""Classical probabilistic automata that embed qubits.

Modules
-------
quantum_core   density matrices, generators, Bloch vectors
automaton      spin configurations, unique-jump steps, wave evolution
bitquantum     maps from classical distributions to density matrices
gates          gate catalog, automaton realizations, effective Hamiltonians
measurement    correlations, sequential measurements, CHSH, Kochen-Specker
opensystem     a qubit coupled to an environment qubit
continuum      clocks, sphere states and rotations of continuous spins
oscillator     phase-space waves of the harmonic oscillator
cli            scenario runner
"""

__version__ = "0.1.0"
