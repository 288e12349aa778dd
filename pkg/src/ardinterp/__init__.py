"""Decision procedure and Craig interpolation for arrays with maxdiff."""
