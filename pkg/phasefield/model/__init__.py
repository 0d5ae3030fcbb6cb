"""Double-well potentials and the one-dimensional heteroclinic profile."""
