"""Random-walk parking on the integer line and on cycles."""
