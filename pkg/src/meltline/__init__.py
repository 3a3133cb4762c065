"""Line balancing and day scheduling for aluminium melting/casting lines."""

__version__ = "0.1.0"
