"""pdae: constraint-elimination solver for a semi-explicit PDAE on the unit interval."""
