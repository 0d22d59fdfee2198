"""Error types and path helpers shared by the pdae modules."""
