"""2k-ended entire solutions on the plane."""
