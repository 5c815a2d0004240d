"""Travel time disruption analytics and OD matrix estimation."""

__version__ = '1.0.0'
