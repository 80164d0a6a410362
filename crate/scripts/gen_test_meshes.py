#!/usr/bin/env python3
"""Generate the curved test meshes used by the surface tests.

Both meshes are star-shaped about their centroid, so a single interior vertex
coned to every boundary triangle gives a valid tetrahedral mesh whose boundary
is exactly the triangulated surface.

    python3 scripts/gen_test_meshes.py crates/core/tests/data
"""
import json
import math
import sys


def icosphere(subdivisions, radius):
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]

    def unit(p):
        n = math.sqrt(sum(c * c for c in p))
        return tuple(c / n for c in p)

    verts = [unit(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                pa, pb = verts[a], verts[b]
                verts.append(unit(tuple((x + y) / 2 for x, y in zip(pa, pb))))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    verts = [tuple(radius * c for c in v) for v in verts]
    return verts, [(f, 1) for f in faces]


def cylinder(radius, height, n_theta, n_z):
    verts = []
    faces = []
    idx = {}
    for k in range(n_z + 1):
        z = height * k / n_z
        for j in range(n_theta):
            th = 2 * math.pi * j / n_theta
            idx[(j, k)] = len(verts)
            verts.append((radius * math.cos(th), radius * math.sin(th), z))
    for k in range(n_z):
        for j in range(n_theta):
            a, b = idx[(j, k)], idx[((j + 1) % n_theta, k)]
            c, d = idx[((j + 1) % n_theta, k + 1)], idx[(j, k + 1)]
            faces += [((a, b, c), 1), ((a, c, d), 1)]
    bottom = len(verts)
    verts.append((0.0, 0.0, 0.0))
    top = len(verts)
    verts.append((0.0, 0.0, height))
    for j in range(n_theta):
        a, b = idx[(j, 0)], idx[((j + 1) % n_theta, 0)]
        faces.append(((bottom, b, a), 2))
        a, b = idx[(j, n_z)], idx[((j + 1) % n_theta, n_z)]
        faces.append(((top, a, b), 3))
    return verts, faces


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cone_mesh(verts, faces):
    n = len(verts)
    centre = tuple(sum(v[i] for v in verts) / n for i in range(3))
    verts = list(verts) + [centre]
    c = n
    tets, facets = [], []
    for t, ((a, b, d), label) in enumerate(faces):
        pa, pb, pd = verts[a], verts[b], verts[d]
        normal = cross(sub(pb, pa), sub(pd, pa))
        if dot(normal, sub(pa, centre)) < 0:
            b, d = d, b
        tet = [a, b, d, c]
        pa, pb, pd, pc = (verts[i] for i in tet)
        if dot(cross(sub(pb, pa), sub(pd, pa)), sub(pc, pa)) < 0:
            tet = [a, d, b, c]
        tets.append(tet)
        facets.append({"vertices": [a, b, d], "label": label, "tet": t})
    return {"vertices": [list(v) for v in verts], "tets": tets, "boundary_facets": facets}


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    for name, mesh in [
        ("icosphere_r1_s4.json", cone_mesh(*icosphere(4, 1.0))),
        ("cylinder_r1_h2.json", cone_mesh(*cylinder(1.0, 2.0, 96, 24))),
    ]:
        with open(f"{out}/{name}", "w") as fh:
            json.dump(mesh, fh)
            fh.write("\n")


if __name__ == "__main__":
    main()
