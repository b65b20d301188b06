# Management commands package

