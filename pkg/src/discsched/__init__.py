"""Near-optimal scheduling for discounted LTL with quality operators."""
