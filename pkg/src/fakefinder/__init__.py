"""Credit-metered detection service for AI-generated images and audio."""

__version__ = "0.1.0"
