import numpy as np

EARTH_RADIUS_M = 6371008.8


def haversine_m(lat1, lon1, lat2, lon2):
    # Great-circle distance in meters, works on scalars and numpy arrays
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    d_phi = phi2 - phi1
    d_lambda = np.radians(lon2) - np.radians(lon1)

    a = np.sin(d_phi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(d_lambda / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def local_xy_m(lat, lon, ref_lat, ref_lon):
    # Equirectangular projection around a reference point, good enough for matching within a city
    x = np.radians(np.asarray(lon) - ref_lon) * EARTH_RADIUS_M * np.cos(np.radians(ref_lat))
    y = np.radians(np.asarray(lat) - ref_lat) * EARTH_RADIUS_M
    return x, y
