"""Local-global obstructions for norm-one tori over semiglobal fields."""
