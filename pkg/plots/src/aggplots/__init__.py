"""Figure scripts for the solver's CSV outputs: four figure kinds
behind one dispatcher.  Strictly read-only consumers of the CSV
contract; nothing here imports the solver."""

__version__ = "0.1.0"
