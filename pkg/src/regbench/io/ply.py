"""PLY reader/writer for point clouds and triangle meshes.

Clouds are written with float64 x,y,z (plus nx,ny,nz when normals exist) in
either binary-little-endian or ASCII. The reader accepts float32/float64
properties and ignores ones it does not know.
"""

from __future__ import annotations

import numpy as np

from ..geometry.cloud import PointCloud

_DTYPES = {
    "float": "<f4", "float32": "<f4",
    "double": "<f8", "float64": "<f8",
    "char": "<i1", "int8": "<i1",
    "uchar": "<u1", "uint8": "<u1",
    "short": "<i2", "int16": "<i2",
    "ushort": "<u2", "uint16": "<u2",
    "int": "<i4", "int32": "<i4",
    "uint": "<u4", "uint32": "<u4",
}


def write_point_cloud(path, cloud: PointCloud, binary: bool = True) -> None:
    names = ["x", "y", "z"]
    columns = [cloud.points[:, 0], cloud.points[:, 1], cloud.points[:, 2]]
    if cloud.normals is not None:
        names += ["nx", "ny", "nz"]
        columns += [cloud.normals[:, 0], cloud.normals[:, 1], cloud.normals[:, 2]]
    header = ["ply",
              "format binary_little_endian 1.0" if binary else "format ascii 1.0",
              f"element vertex {len(cloud)}"]
    header += [f"property double {n}" for n in names]
    header.append("end_header")
    data = np.rec.fromarrays(columns, dtype=[(n, "<f8") for n in names])
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(data.tobytes())
        else:
            np.savetxt(fh, np.column_stack(columns), fmt="%.17g")


def _parse_header(fh):
    magic = fh.readline().strip()
    if magic != b"ply":
        raise ValueError("not a PLY file")
    fmt = None
    elements = []  # (name, count, [(prop_name, dtype, is_list, count_dtype)])
    while True:
        line = fh.readline()
        if not line:
            raise ValueError("truncated PLY header")
        tokens = line.decode("ascii").strip().split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            fmt = tokens[1]
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if tokens[1] == "list":
                elements[-1][2].append((tokens[4], _DTYPES[tokens[3]], True, _DTYPES[tokens[2]]))
            else:
                elements[-1][2].append((tokens[2], _DTYPES[tokens[1]], False, None))
        elif tokens[0] == "end_header":
            break
    if fmt not in ("ascii", "binary_little_endian"):
        raise ValueError(f"unsupported PLY format: {fmt}")
    return fmt, elements


def _read_elements(fh, fmt, elements):
    out = {}
    if fmt == "ascii":
        text = fh.read().decode("ascii").split()
        pos = 0
        for name, count, props in elements:
            rows = {p[0]: [] for p in props}
            for _ in range(count):
                for pname, dtype, is_list, _cdt in props:
                    if is_list:
                        n = int(text[pos]); pos += 1
                        rows[pname].append([float(text[pos + k]) for k in range(n)])
                        pos += n
                    else:
                        rows[pname].append(float(text[pos])); pos += 1
            out[name] = rows
        return out
    for name, count, props in elements:
        rows = {p[0]: [] for p in props}
        if any(p[2] for p in props):
            for _ in range(count):
                for pname, dtype, is_list, cdt in props:
                    if is_list:
                        n = int(np.frombuffer(fh.read(np.dtype(cdt).itemsize), dtype=cdt)[0])
                        vals = np.frombuffer(fh.read(np.dtype(dtype).itemsize * n), dtype=dtype)
                        rows[pname].append(vals.astype(float).tolist())
                    else:
                        rows[pname].append(float(np.frombuffer(fh.read(np.dtype(dtype).itemsize), dtype=dtype)[0]))
        else:
            rec = np.dtype([(p[0], p[1]) for p in props])
            block = np.frombuffer(fh.read(rec.itemsize * count), dtype=rec, count=count)
            for pname, _, _, _ in props:
                rows[pname] = block[pname].astype(float)
        out[name] = rows
    return out


def read_point_cloud(path) -> PointCloud:
    with open(path, "rb") as fh:
        fmt, elements = _parse_header(fh)
        data = _read_elements(fh, fmt, elements)
    if "vertex" not in data:
        raise ValueError("PLY has no vertex element")
    vtx = data["vertex"]
    pts = np.column_stack([np.asarray(vtx["x"]), np.asarray(vtx["y"]), np.asarray(vtx["z"])])
    normals = None
    if all(k in vtx for k in ("nx", "ny", "nz")):
        normals = np.column_stack([np.asarray(vtx["nx"]), np.asarray(vtx["ny"]), np.asarray(vtx["nz"])])
        lengths = np.linalg.norm(normals, axis=1)
        normals = normals / np.where(lengths > 0, lengths, 1.0)[:, None]
    return PointCloud(pts, normals)


def read_mesh(path):
    """(vertices, faces) from a PLY with triangular faces."""
    with open(path, "rb") as fh:
        fmt, elements = _parse_header(fh)
        data = _read_elements(fh, fmt, elements)
    vtx = data["vertex"]
    verts = np.column_stack([np.asarray(vtx["x"]), np.asarray(vtx["y"]), np.asarray(vtx["z"])])
    face_rows = None
    if "face" in data:
        face_el = data["face"]
        for key in ("vertex_indices", "vertex_index"):
            if key in face_el:
                face_rows = face_el[key]
                break
    if face_rows is None:
        raise ValueError("PLY has no face element")
    faces = []
    for row in face_rows:
        row = [int(v) for v in row]
        for k in range(1, len(row) - 1):  # fan-triangulate polygons
            faces.append([row[0], row[k], row[k + 1]])
    return verts, np.asarray(faces, dtype=np.int64)
