"""polarbench REST API package."""
