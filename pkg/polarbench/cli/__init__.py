"""polarbench CLI package."""
