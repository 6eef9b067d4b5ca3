"""Minor-universal trees and the NCA labeling schemes built on them."""

__version__ = "0.1.0"
