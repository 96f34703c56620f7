#include <hrvem/localsolver.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace hrvem {

namespace {

const ElementFrame kRefFrame{Vector2::Zero(), 1.0};

}  // namespace

struct LocalDisplacementSolver::RefData {
  QuadratureRule rule;                 // on the reference triangle
  Matrix shape;                        // nq x m nodal values
  Matrix dxi, deta;                    // nq x m reference gradients
  Matrix dxixi, dxieta, detaeta;       // nq x m reference second derivatives
};

namespace {

using RefQuadData = LocalDisplacementSolver::RefData;

RefQuadData reference_quadrature(const FemSpace& fem, int degree) {
  RefQuadData data;
  const Triangle ref{{0, 0}, {1, 0}, {0, 1}};
  data.rule = triangle_quadrature(ref, degree);
  const int k = fem.config.degree;
  const Matrix mono = monomial_values(kRefFrame, k, data.rule.nodes);
  data.shape = mono * fem.ref_nodal_coeffs;

  const Matrix d0 = monomial_derivative(k, 1.0, 0);
  const Matrix d1 = monomial_derivative(k, 1.0, 1);
  const Matrix mono_lo = monomial_values(kRefFrame, k - 1, data.rule.nodes);
  data.dxi = mono_lo * (d0 * fem.ref_nodal_coeffs);
  data.deta = mono_lo * (d1 * fem.ref_nodal_coeffs);

  if (k >= 2) {
    const Matrix d00 = monomial_derivative(k - 1, 1.0, 0);
    const Matrix d01 = monomial_derivative(k - 1, 1.0, 1);
    const Matrix mono_lo2 = monomial_values(kRefFrame, k - 2, data.rule.nodes);
    data.dxixi = mono_lo2 * (d00 * d0 * fem.ref_nodal_coeffs);
    data.dxieta = mono_lo2 * (d01 * d0 * fem.ref_nodal_coeffs);
    data.detaeta = mono_lo2 * (d01 * d1 * fem.ref_nodal_coeffs);
  } else {
    data.dxixi = Matrix::Zero(data.rule.size(), fem.nodes_per_cell());
    data.dxieta = data.dxixi;
    data.detaeta = data.dxixi;
  }
  return data;
}

struct CellGeometry {
  Matrix2 jac;
  Matrix2 jac_inv;
  Scalar det = 0.0;
  Vector2 origin;
};

CellGeometry cell_geometry(const FemSpace& fem, int t) {
  CellGeometry g;
  const Vector2 a = fem.nodes[fem.tri_vertices[t][0]];
  const Vector2 b = fem.nodes[fem.tri_vertices[t][1]];
  const Vector2 c = fem.nodes[fem.tri_vertices[t][2]];
  g.origin = a;
  g.jac.col(0) = b - a;
  g.jac.col(1) = c - a;
  g.det = g.jac.determinant();
  g.jac_inv = g.jac.inverse();
  return g;
}

Vector map_weights(const QuadratureRule& quad) {
  return Eigen::Map<const Vector>(quad.weights.data(), quad.size());
}

}  // namespace

FemSpace make_fem_space(const Polygon& poly, FemConfig config) {
  const int k = config.degree;
  if (k < 1 || k > 8) throw std::invalid_argument("fem degree must be 1..8");
  if (config.nref < 0 || config.nref > 6) {
    throw std::invalid_argument("fem refinement must be 0..6");
  }
  if (!star_shaped_wrt_centroid(poly)) {
    throw std::invalid_argument("element is not star-shaped w.r.t. its centroid");
  }

  FemSpace fem;
  fem.parent = poly;
  fem.config = config;

  // Structured collapsed grid on every centroid-fan triangle, graded
  // toward the polygon vertices; ray and edge partitions are shared with
  // the neighbouring fan triangles so the union is conforming.
  const int m = 1 << config.nref;
  const Scalar beta = config.grading > 0 ? config.grading : 1.0;
  auto grade_ray = [&](int i) {  // along c -> vertex, dense near the vertex
    const Scalar t = static_cast<Scalar>(m - i) / m;
    return 1.0 - std::pow(t, beta);
  };
  auto grade_edge = [&](int j) {  // along a -> b, dense near both ends
    if (2 * j <= m) return 0.5 * std::pow(2.0 * j / m, beta);
    return 1.0 - 0.5 * std::pow(2.0 * (m - j) / m, beta);
  };

  std::vector<Vector2> verts;
  verts.push_back(poly.centroid);
  const int n_poly = poly.num_edges();
  for (const Vector2& v : poly.vertices) verts.push_back(v);
  std::map<std::pair<int, int>, int> ray_nodes;   // (vertex, i)
  std::map<std::pair<int, int>, int> edge_nodes;  // (edge, j)

  std::vector<std::array<int, 3>> tris;
  std::vector<std::array<int, 3>> tags;
  for (int e = 0; e < n_poly; ++e) {
    const Vector2 a = poly.vertices[e];
    const Vector2 b = poly.vertices[(e + 1) % n_poly];
    const Vector2 c = poly.centroid;
    auto point = [&](int i, int j) {
      const Scalar u = grade_ray(i);
      const Scalar v = grade_edge(j);
      return (c + u * ((1.0 - v) * (a - c) + v * (b - c))).eval();
    };
    auto node = [&](int i, int j) -> int {
      if (i == 0) return 0;
      if (i == m && j == 0) return 1 + e;
      if (i == m && j == m) return 1 + (e + 1) % n_poly;
      std::map<std::pair<int, int>, int>* shared = nullptr;
      std::pair<int, int> key{0, 0};
      if (j == 0) {
        shared = &ray_nodes;
        key = {e, i};
      } else if (j == m) {
        shared = &ray_nodes;
        key = {(e + 1) % n_poly, i};
      } else if (i == m) {
        shared = &edge_nodes;
        key = {e, j};
      }
      if (shared != nullptr) {
        auto it = shared->find(key);
        if (it != shared->end()) return it->second;
        const int id = static_cast<int>(verts.size());
        verts.push_back(point(i, j));
        shared->emplace(key, id);
        return id;
      }
      const int id = static_cast<int>(verts.size());
      verts.push_back(point(i, j));
      return id;
    };

    // Interior nodes are unique per (i, j); memoize within this fan cell.
    std::map<std::pair<int, int>, int> local;
    auto cell_node = [&](int i, int j) {
      const auto key = std::make_pair(i, j);
      auto it = local.find(key);
      if (it != local.end()) return it->second;
      const int id = node(i, j);
      local.emplace(key, id);
      return id;
    };

    for (int j = 0; j < m; ++j) {
      const int tag = m == 1 ? e : -1;
      tris.push_back({0, cell_node(1, j), cell_node(1, j + 1)});
      tags.push_back({-1, tag, -1});
    }
    for (int i = 1; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const int lo_l = cell_node(i, j), lo_r = cell_node(i, j + 1);
        const int hi_l = cell_node(i + 1, j), hi_r = cell_node(i + 1, j + 1);
        const int tag = i + 1 == m ? e : -1;
        tris.push_back({lo_l, hi_l, hi_r});
        tags.push_back({-1, tag, -1});
        tris.push_back({lo_l, hi_r, lo_r});
        tags.push_back({-1, -1, -1});
      }
    }
  }
  fem.tri_vertices = tris;
  fem.tri_edge_tags = tags;

  // Global P_k lattice: vertex nodes reuse the mesh vertex ids, then
  // k-1 nodes per undirected mesh edge, then cell-interior nodes.
  fem.nodes = verts;
  std::map<std::pair<int, int>, int> edge_base;
  auto edge_nodes_base = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = edge_base.find(key);
    if (it != edge_base.end()) return it->second;
    const int base = static_cast<int>(fem.nodes.size());
    const Vector2 pa = fem.nodes[key.first], pb = fem.nodes[key.second];
    for (int s = 1; s < k; ++s) {
      fem.nodes.push_back(pa + (static_cast<Scalar>(s) / k) * (pb - pa));
    }
    edge_base.emplace(key, base);
    return base;
  };

  fem.connectivity.resize(tris.size());
  for (size_t t = 0; t < tris.size(); ++t) {
    const auto [a, b, c] = tris[t];
    std::vector<int>& conn = fem.connectivity[t];
    conn.reserve(fem.nodes_per_cell());
    const Vector2 pa = fem.nodes[a], pb = fem.nodes[b], pc = fem.nodes[c];
    auto edge_node = [&](int u, int v, int s) {
      // s-th lattice node (1..k-1) walking from u to v.
      const int base = edge_nodes_base(u, v);
      return u < v ? base + s - 1 : base + (k - s) - 1;
    };
    for (int j = 0; j <= k; ++j) {
      for (int i = 0; i + j <= k; ++i) {
        if (i == 0 && j == 0) {
          conn.push_back(a);
        } else if (i == k && j == 0) {
          conn.push_back(b);
        } else if (i == 0 && j == k) {
          conn.push_back(c);
        } else if (j == 0) {
          conn.push_back(edge_node(a, b, i));
        } else if (i + j == k) {
          conn.push_back(edge_node(b, c, j));
        } else if (i == 0) {
          conn.push_back(edge_node(c, a, k - j));
        } else {
          conn.push_back(static_cast<int>(fem.nodes.size()));
          fem.nodes.push_back(pa + (static_cast<Scalar>(i) / k) * (pb - pa) +
                              (static_cast<Scalar>(j) / k) * (pc - pa));
        }
      }
    }
  }

  // Nodal shape functions on the reference triangle from the monomial
  // Vandermonde at the lattice points.
  std::vector<Vector2> lattice;
  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i + j <= k; ++i) {
      lattice.emplace_back(static_cast<Scalar>(i) / k, static_cast<Scalar>(j) / k);
    }
  }
  const Matrix vand = monomial_values(kRefFrame, k, lattice);
  fem.ref_nodal_coeffs =
      vand.partialPivLu().solve(Matrix::Identity(vand.rows(), vand.cols()));
  return fem;
}

LocalProblemData face_problem_data(const HrLocalSpace& space, int edge, int member) {
  const Polygon& poly = space.polygon();
  if (edge < 0 || edge >= poly.num_edges()) {
    throw std::invalid_argument("face_problem_data: edge index out of range");
  }
  const int per_edge = 2 * (space.degree() + 1);
  if (member < 0 || member >= per_edge) {
    throw std::invalid_argument("face_problem_data: member index out of range");
  }
  LocalProblemData data;
  data.perp_coeffs = Vector::Zero(space.num_interior_dofs());
  data.traction_coeffs.assign(poly.num_edges(), Vector::Zero(per_edge));
  data.traction_coeffs[edge][member] = 1.0;

  // (r, rho)_K = int_e q . rho for all rigid motions rho.
  const QuadratureRule equad = edge_quadrature(poly.edges[edge], space.degree() + 3);
  const Matrix scal = eval_edge_scalar(space.edge_basis(edge), equad.nodes);
  Matrix rx, ry;
  eval_vector(space.rm(), equad.nodes, rx, ry);
  const Vector w = map_weights(equad);
  Vector rhs(3);
  const int j = member / 2;
  const int dir = member % 2;
  for (int a = 0; a < 3; ++a) {
    const auto& comp = dir == 0 ? rx : ry;
    rhs[a] = (w.array() * scal.col(j).array() * comp.col(a).array()).sum();
  }
  data.rm_coeffs = space.rm_gram().ldlt().solve(rhs);
  return data;
}

LocalProblemData bulk_problem_data(const HrLocalSpace& space, int member) {
  if (member < 0 || member >= space.num_interior_dofs()) {
    throw std::invalid_argument("bulk_problem_data: member index out of range");
  }
  LocalProblemData data;
  data.rm_coeffs = Vector::Zero(3);
  data.perp_coeffs = Vector::Zero(space.num_interior_dofs());
  data.perp_coeffs[member] = 1.0;
  data.traction_coeffs.assign(space.polygon().num_edges(),
                              Vector::Zero(2 * (space.degree() + 1)));
  return data;
}

LocalProblemData data_from_dofs(const HrLocalSpace& space, const Vector& dofs) {
  if (dofs.size() != space.num_dofs()) {
    throw std::invalid_argument("data_from_dofs: dof vector has wrong size");
  }
  LocalProblemData data;
  data.rm_coeffs = space.div_rm_map() * dofs;
  data.perp_coeffs = space.div_perp_map() * dofs;
  data.traction_coeffs.resize(space.polygon().num_edges());
  for (int e = 0; e < space.polygon().num_edges(); ++e) {
    data.traction_coeffs[e] = space.traction_map(e) * dofs;
  }
  return data;
}

Scalar compatibility_residual(const HrLocalSpace& space, const LocalProblemData& data) {
  // Volume term: -int_K (r + r_perp) . rho; the RM-orthogonal part drops.
  const Vector volume = -(space.rm_gram() * data.rm_coeffs);
  Vector boundary = Vector::Zero(3);
  const Polygon& poly = space.polygon();
  for (int e = 0; e < poly.num_edges(); ++e) {
    const QuadratureRule equad = edge_quadrature(poly.edges[e], space.degree() + 3);
    const Matrix scal = eval_edge_scalar(space.edge_basis(e), equad.nodes);
    Matrix rx, ry;
    eval_vector(space.rm(), equad.nodes, rx, ry);
    const Vector w = map_weights(equad);
    const Vector& c = data.traction_coeffs[e];
    for (int a = 0; a < 3; ++a) {
      Scalar acc = 0.0;
      for (int j = 0; j <= space.degree(); ++j) {
        acc += c[2 * j] * (w.array() * scal.col(j).array() * rx.col(a).array()).sum();
        acc += c[2 * j + 1] * (w.array() * scal.col(j).array() * ry.col(a).array()).sum();
      }
      boundary[a] += acc;
    }
  }
  const Scalar scale =
      std::max({1.0, volume.cwiseAbs().maxCoeff(), boundary.cwiseAbs().maxCoeff()});
  return (volume + boundary).cwiseAbs().maxCoeff() / scale;
}

LocalDisplacementSolver::LocalDisplacementSolver(const HrLocalSpace& space,
                                                 FemConfig config, RmGauge gauge)
    : space_(&space), fem_(make_fem_space(space.polygon(), config)), gauge_(gauge) {
  const int k = config.degree;
  const int m = fem_.nodes_per_cell();
  const int n2 = 2 * fem_.num_nodes();
  const Material& mat = space.material();
  const bool split_divergence = mat.lambda >= 1e3;

  ref_ = std::make_shared<RefData>(
      reference_quadrature(fem_, std::max(2 * k, space.degree() + k) + 2));
  const RefQuadData& ref = *ref_;
  const int nq = ref.rule.size();
  const Matrix3 c3 = mat.stiffness_matrix();

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<size_t>(fem_.num_triangles()) * 4 * m * m);
  Matrix b_mat(3, 2 * m);
  for (int t = 0; t < fem_.num_triangles(); ++t) {
    const CellGeometry g = cell_geometry(fem_, t);
    const std::vector<int>& conn = fem_.connectivity[t];
    Matrix k_loc = Matrix::Zero(2 * m, 2 * m);

    // Physical gradients at the mapped quadrature points.
    const Matrix gx = g.jac_inv(0, 0) * ref.dxi + g.jac_inv(1, 0) * ref.deta;
    const Matrix gy = g.jac_inv(0, 1) * ref.dxi + g.jac_inv(1, 1) * ref.deta;

    for (int q = 0; q < nq; ++q) {
      const Scalar w = ref.rule.weights[q] * g.det;
      for (int a = 0; a < m; ++a) {
        b_mat(0, 2 * a) = gx(q, a);
        b_mat(1, 2 * a) = 0.0;
        b_mat(2, 2 * a) = gy(q, a) / kSqrt2;
        b_mat(0, 2 * a + 1) = 0.0;
        b_mat(1, 2 * a + 1) = gy(q, a);
        b_mat(2, 2 * a + 1) = gx(q, a) / kSqrt2;
      }
      if (split_divergence) {
        k_loc += (w * 2.0 * mat.mu) * b_mat.transpose() * b_mat;
      } else {
        k_loc += w * b_mat.transpose() * c3 * b_mat;
      }
    }

    if (split_divergence) {
      // lambda (Pi div u, Pi div v) with the triangle-wise L2 projection
      // of the divergence onto P_{k-1}.
      const Vector2 centroid =
          (fem_.nodes[fem_.tri_vertices[t][0]] + fem_.nodes[fem_.tri_vertices[t][1]] +
           fem_.nodes[fem_.tri_vertices[t][2]]) /
          3.0;
      const ElementFrame tri_frame{centroid, std::sqrt(std::abs(g.det))};
      std::vector<Vector2> phys(nq);
      for (int q = 0; q < nq; ++q) {
        phys[q] = g.origin + g.jac * ref.rule.nodes[q];
      }
      const Matrix proj_mono = monomial_values(tri_frame, k - 1, phys);
      Vector w_phys(nq);
      for (int q = 0; q < nq; ++q) w_phys[q] = ref.rule.weights[q] * g.det;
      Matrix div(nq, 2 * m);
      for (int a = 0; a < m; ++a) {
        div.col(2 * a) = gx.col(a);
        div.col(2 * a + 1) = gy.col(a);
      }
      const Matrix gram = proj_mono.transpose() * w_phys.asDiagonal() * proj_mono;
      const Matrix rhs = proj_mono.transpose() * w_phys.asDiagonal() * div;
      const Matrix coeffs = gram.ldlt().solve(rhs);
      k_loc += mat.lambda * coeffs.transpose() * gram * coeffs;
    }

    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int da = 0; da < 2; ++da) {
          for (int db = 0; db < 2; ++db) {
            triplets.emplace_back(2 * conn[a] + da, 2 * conn[b] + db,
                                  k_loc(2 * a + da, 2 * b + db));
          }
        }
      }
    }
  }
  stiffness_.resize(n2, n2);
  stiffness_.setFromTriplets(triplets.begin(), triplets.end());
  diag_scale_ = stiffness_.diagonal().mean();

  // Rigid-motion constraints.
  constraints_ = Matrix::Zero(n2, 3);
  if (gauge_ == RmGauge::Volume) {
    for (int t = 0; t < fem_.num_triangles(); ++t) {
      const CellGeometry g = cell_geometry(fem_, t);
      const std::vector<int>& conn = fem_.connectivity[t];
      std::vector<Vector2> phys(nq);
      for (int q = 0; q < nq; ++q) phys[q] = g.origin + g.jac * ref.rule.nodes[q];
      Matrix rx, ry;
      eval_vector(space.rm(), phys, rx, ry);
      for (int q = 0; q < nq; ++q) {
        const Scalar w = ref.rule.weights[q] * g.det;
        for (int a = 0; a < m; ++a) {
          for (int d = 0; d < 3; ++d) {
            constraints_(2 * conn[a], d) += w * ref.shape(q, a) * rx(q, d);
            constraints_(2 * conn[a] + 1, d) += w * ref.shape(q, a) * ry(q, d);
          }
        }
      }
    }
  } else {
    for (int t = 0; t < fem_.num_triangles(); ++t) {
      const CellGeometry g = cell_geometry(fem_, t);
      const std::vector<int>& conn = fem_.connectivity[t];
      for (int le = 0; le < 3; ++le) {
        if (fem_.tri_edge_tags[t][le] < 0) continue;
        const Vector2 pa = fem_.nodes[fem_.tri_vertices[t][le]];
        const Vector2 pb = fem_.nodes[fem_.tri_vertices[t][(le + 1) % 3]];
        const QuadratureRule equad = segment_quadrature(pa, pb, 2 * k + 2);
        std::vector<Vector2> ref_pts(equad.size());
        for (int q = 0; q < equad.size(); ++q) {
          ref_pts[q] = g.jac_inv * (equad.nodes[q] - g.origin);
        }
        const Matrix shape =
            monomial_values(kRefFrame, k, ref_pts) * fem_.ref_nodal_coeffs;
        Matrix rx, ry;
        eval_vector(space.rm(), equad.nodes, rx, ry);
        for (int q = 0; q < equad.size(); ++q) {
          for (int a = 0; a < m; ++a) {
            for (int d = 0; d < 3; ++d) {
              constraints_(2 * conn[a], d) += equad.weights[q] * shape(q, a) * rx(q, d);
              constraints_(2 * conn[a] + 1, d) +=
                  equad.weights[q] * shape(q, a) * ry(q, d);
            }
          }
        }
      }
    }
  }

  // Pin three local dofs to make the stiffness invertible; the requested
  // rigid-motion gauge is restored by projection after each solve. Node 0
  // is the centroid, node 1 the first polygon vertex.
  pinned_[0] = 0;
  pinned_[1] = 1;
  const Vector2 arm = fem_.nodes[1] - fem_.nodes[0];
  pinned_[2] = 2 + (std::abs(arm.y()) >= std::abs(arm.x()) ? 0 : 1);

  Eigen::SparseMatrix<Scalar> pinned = stiffness_;
  for (int outer = 0; outer < pinned.outerSize(); ++outer) {
    for (Eigen::SparseMatrix<Scalar>::InnerIterator it(pinned, outer); it; ++it) {
      const bool row_pinned = it.row() == pinned_[0] || it.row() == pinned_[1] ||
                              it.row() == pinned_[2];
      const bool col_pinned = it.col() == pinned_[0] || it.col() == pinned_[1] ||
                              it.col() == pinned_[2];
      if (row_pinned || col_pinned) {
        it.valueRef() = it.row() == it.col() ? diag_scale_ : 0.0;
      }
    }
  }
  pinned_matrix_ = pinned;
  factorization_.compute(pinned_matrix_);
  if (factorization_.info() != Eigen::Success) {
    throw std::runtime_error("local solver: singular pinned system");
  }

  // Nodal coefficients of the rigid motions (exact, RM lies in P_k) and
  // the 3x3 gauge system.
  rm_nodal_ = Matrix::Zero(n2, 3);
  {
    Matrix rx, ry;
    eval_vector(space.rm(), fem_.nodes, rx, ry);
    for (int i = 0; i < fem_.num_nodes(); ++i) {
      for (int d = 0; d < 3; ++d) {
        rm_nodal_(2 * i, d) = rx(i, d);
        rm_nodal_(2 * i + 1, d) = ry(i, d);
      }
    }
  }
  gauge_system_ = constraints_.transpose() * rm_nodal_;
}
Vector LocalDisplacementSolver::assemble_rhs(const LocalProblemData& data) const {
  const HrLocalSpace& space = *space_;
  const int k = fem_.config.degree;
  const int m = fem_.nodes_per_cell();
  const int n2 = 2 * fem_.num_nodes();
  Vector rhs = Vector::Zero(n2);

  // Body force -(r + r_perp).
  const RefQuadData& ref = *ref_;
  const int nq = ref.rule.size();
  const bool has_rm =
      data.rm_coeffs.size() == 3 && data.rm_coeffs.cwiseAbs().maxCoeff() > 0;
  const bool has_perp =
      data.perp_coeffs.size() > 0 && data.perp_coeffs.cwiseAbs().maxCoeff() > 0;
  if (has_rm || has_perp) {
    for (int t = 0; t < fem_.num_triangles(); ++t) {
      const CellGeometry g = cell_geometry(fem_, t);
      const std::vector<int>& conn = fem_.connectivity[t];
      std::vector<Vector2> phys(nq);
      for (int q = 0; q < nq; ++q) phys[q] = g.origin + g.jac * ref.rule.nodes[q];
      Vector fx = Vector::Zero(nq), fy = Vector::Zero(nq);
      if (has_rm) {
        Matrix rx, ry;
        eval_vector(space.rm(), phys, rx, ry);
        fx -= rx * data.rm_coeffs;
        fy -= ry * data.rm_coeffs;
      }
      if (has_perp) {
        Matrix px, py;
        eval_vector(space.rm_perp(), phys, px, py);
        fx -= px * data.perp_coeffs;
        fy -= py * data.perp_coeffs;
      }
      for (int q = 0; q < nq; ++q) {
        const Scalar w = ref.rule.weights[q] * g.det;
        for (int a = 0; a < m; ++a) {
          rhs[2 * conn[a]] += w * ref.shape(q, a) * fx[q];
          rhs[2 * conn[a] + 1] += w * ref.shape(q, a) * fy[q];
        }
      }
    }
  }

  // Tractions over the tagged boundary sub-edges.
  for (int t = 0; t < fem_.num_triangles(); ++t) {
    for (int le = 0; le < 3; ++le) {
      const int tag = fem_.tri_edge_tags[t][le];
      if (tag < 0) continue;
      const Vector& c = data.traction_coeffs[tag];
      if (c.cwiseAbs().maxCoeff() == 0.0) continue;
      const CellGeometry g = cell_geometry(fem_, t);
      const std::vector<int>& conn = fem_.connectivity[t];
      const Vector2 pa = fem_.nodes[fem_.tri_vertices[t][le]];
      const Vector2 pb = fem_.nodes[fem_.tri_vertices[t][(le + 1) % 3]];
      const QuadratureRule equad =
          segment_quadrature(pa, pb, space.degree() + k + 2);
      std::vector<Vector2> ref_pts(equad.size());
      for (int q = 0; q < equad.size(); ++q) {
        ref_pts[q] = g.jac_inv * (equad.nodes[q] - g.origin);
      }
      const Matrix shape =
          monomial_values(kRefFrame, k, ref_pts) * fem_.ref_nodal_coeffs;
      const Matrix scal = eval_edge_scalar(space.edge_basis(tag), equad.nodes);
      for (int q = 0; q < equad.size(); ++q) {
        Scalar gx = 0.0, gy = 0.0;
        for (int j = 0; j <= space.degree(); ++j) {
          gx += c[2 * j] * scal(q, j);
          gy += c[2 * j + 1] * scal(q, j);
        }
        for (int a = 0; a < m; ++a) {
          rhs[2 * conn[a]] += equad.weights[q] * shape(q, a) * gx;
          rhs[2 * conn[a] + 1] += equad.weights[q] * shape(q, a) * gy;
        }
      }
    }
  }
  return rhs;
}

Vector LocalDisplacementSolver::solve(const LocalProblemData& data) const {
  if (compatibility_residual(*space_, data) > 1e-8) {
    throw std::invalid_argument("local solver: incompatible Neumann data");
  }
  Vector rhs = assemble_rhs(data);
  for (int i : pinned_) rhs[i] = 0.0;
  return apply_gauge(refined_solve(rhs));
}

// One step of iterative refinement recovers the digits the unpivoted
// factorization loses on nearly incompressible materials.
Vector LocalDisplacementSolver::refined_solve(const Vector& rhs) const {
  Vector z = factorization_.solve(rhs);
  Vector residual = rhs - pinned_matrix_ * z;
  for (int i : pinned_) residual[i] = 0.0;
  z += factorization_.solve(residual);
  return z;
}

Vector LocalDisplacementSolver::apply_gauge(const Vector& z) const {
  const Vector moments = constraints_.transpose() * z;
  return z - rm_nodal_ * gauge_system_.partialPivLu().solve(moments);
}

const Matrix& LocalDisplacementSolver::basis_displacements() const {
  if (basis_solved_) return basis_displacements_;
  const HrLocalSpace& space = *space_;
  const int n2 = 2 * fem_.num_nodes();
  Matrix rhs(n2, space.num_dofs());
  int col = 0;
  for (int e = 0; e < space.polygon().num_edges(); ++e) {
    for (int mem = 0; mem < 2 * (space.degree() + 1); ++mem) {
      rhs.col(col++) = assemble_rhs(face_problem_data(space, e, mem));
    }
  }
  for (int mem = 0; mem < space.num_interior_dofs(); ++mem) {
    rhs.col(col++) = assemble_rhs(bulk_problem_data(space, mem));
  }
  for (int i : pinned_) rhs.row(i).setZero();
  basis_displacements_.resize(n2, space.num_dofs());
  for (int j = 0; j < rhs.cols(); ++j) {
    basis_displacements_.col(j) = apply_gauge(refined_solve(rhs.col(j)));
  }
  basis_solved_ = true;
  return basis_displacements_;
}

Matrix LocalDisplacementSolver::energy_matrix(const Matrix& z) const {
  const Matrix kz = stiffness_ * z;
  Matrix b = z.transpose() * kz;
  return 0.5 * (b + b.transpose());
}

Scalar LocalDisplacementSolver::stress_error_sq(
    const Vector& z, const std::function<Vector3(const Vector2&)>& sigma,
    int quad_degree) const {
  const int k = fem_.config.degree;
  const int m = fem_.nodes_per_cell();
  const Matrix3 c3 = space_->material().stiffness_matrix();
  const Matrix d0 = monomial_derivative(k, 1.0, 0);
  const Matrix d1 = monomial_derivative(k, 1.0, 1);

  Scalar total = 0.0;
  for (int t = 0; t < fem_.num_triangles(); ++t) {
    const CellGeometry g = cell_geometry(fem_, t);
    const std::vector<int>& conn = fem_.connectivity[t];
    const Triangle tri{fem_.nodes[fem_.tri_vertices[t][0]],
                       fem_.nodes[fem_.tri_vertices[t][1]],
                       fem_.nodes[fem_.tri_vertices[t][2]]};
    const QuadratureRule quad = triangle_quadrature(tri, quad_degree);
    std::vector<Vector2> ref_pts(quad.size());
    for (int q = 0; q < quad.size(); ++q) {
      ref_pts[q] = g.jac_inv * (quad.nodes[q] - g.origin);
    }
    const Matrix mono_lo = monomial_values(kRefFrame, k - 1, ref_pts);
    const Matrix dxi = mono_lo * (d0 * fem_.ref_nodal_coeffs);
    const Matrix deta = mono_lo * (d1 * fem_.ref_nodal_coeffs);
    const Matrix gx = g.jac_inv(0, 0) * dxi + g.jac_inv(1, 0) * deta;
    const Matrix gy = g.jac_inv(0, 1) * dxi + g.jac_inv(1, 1) * deta;

    for (int q = 0; q < quad.size(); ++q) {
      Scalar ux = 0, uy = 0, vx = 0, vy = 0;
      for (int a = 0; a < m; ++a) {
        ux += z[2 * conn[a]] * gx(q, a);
        uy += z[2 * conn[a]] * gy(q, a);
        vx += z[2 * conn[a] + 1] * gx(q, a);
        vy += z[2 * conn[a] + 1] * gy(q, a);
      }
      const Vector3 strain(ux, vy, (uy + vx) / kSqrt2);
      const Vector3 diff = c3 * strain - sigma(quad.nodes[q]);
      total += quad.weights[q] * diff.squaredNorm();
    }
  }
  return total;
}

Vector LocalDisplacementSolver::surrogate_dofs(const Vector& z,
                                               const LocalProblemData& data) const {
  const HrLocalSpace& space = *space_;
  const int p = space.degree();
  const int k = fem_.config.degree;
  const int m = fem_.nodes_per_cell();
  const Matrix3 c3 = space.material().stiffness_matrix();
  Vector dofs = Vector::Zero(space.num_dofs());

  // Traction dofs come from the imposed data.
  for (int e = 0; e < space.polygon().num_edges(); ++e) {
    dofs.segment(space.edge_dof_offset(e), 2 * (p + 1)) =
        space.edge_mass(e) * data.traction_coeffs[e] / space.polygon().edges[e].length;
  }
  if (space.num_interior_dofs() == 0) return dofs;

  // Interior dofs through the divergence theorem on K, with the surrogate
  // stress inside and its boundary flux on the edges:
  //   int_K div(sigma_h) . m = -int_K sigma_h : grad_S m + int_dK (sigma_h n) . m.
  const RefData& ref = *ref_;
  const int nq = ref.rule.size();
  const int ni = space.num_interior_dofs();
  const ScaledBasis& perp = space.rm_perp();
  const int dim = poly_space_dim(p);
  const Matrix pdx = monomial_derivative(p, perp.frame.scale, 0);
  const Matrix pdy = monomial_derivative(p, perp.frame.scale, 1);
  // Packed grad_S of every rm_perp member (degree p-1 coefficients).
  Matrix g11(poly_space_dim(p - 1), ni), g22 = g11, g12s = g11;
  for (int i = 0; i < ni; ++i) {
    const Vector qx = perp.coeffs.col(i).head(dim);
    const Vector qy = perp.coeffs.col(i).tail(dim);
    g11.col(i) = pdx * qx;
    g22.col(i) = pdy * qy;
    g12s.col(i) = (pdy * qx + pdx * qy) / kSqrt2;
  }

  Vector acc = Vector::Zero(ni);
  for (int t = 0; t < fem_.num_triangles(); ++t) {
    const CellGeometry g = cell_geometry(fem_, t);
    const std::vector<int>& conn = fem_.connectivity[t];
    const Matrix gx = g.jac_inv(0, 0) * ref.dxi + g.jac_inv(1, 0) * ref.deta;
    const Matrix gy = g.jac_inv(0, 1) * ref.dxi + g.jac_inv(1, 1) * ref.deta;
    std::vector<Vector2> phys(nq);
    for (int q = 0; q < nq; ++q) phys[q] = g.origin + g.jac * ref.rule.nodes[q];
    const Matrix mono_lo = monomial_values(perp.frame, p - 1, phys);
    const Matrix m11 = mono_lo * g11;
    const Matrix m22 = mono_lo * g22;
    const Matrix m12s = mono_lo * g12s;
    for (int q = 0; q < nq; ++q) {
      Scalar ux = 0, uy = 0, vx = 0, vy = 0;
      for (int s = 0; s < m; ++s) {
        ux += z[2 * conn[s]] * gx(q, s);
        uy += z[2 * conn[s]] * gy(q, s);
        vx += z[2 * conn[s] + 1] * gx(q, s);
        vy += z[2 * conn[s] + 1] * gy(q, s);
      }
      const Vector3 sigma = c3 * Vector3(ux, vy, (uy + vx) / kSqrt2);
      const Scalar w = ref.rule.weights[q] * g.det;
      for (int i = 0; i < ni; ++i) {
        acc[i] -= w * (sigma[0] * m11(q, i) + sigma[1] * m22(q, i) +
                       sigma[2] * m12s(q, i));
      }
    }
  }

  // Boundary flux of the surrogate stress.
  const Matrix d0 = monomial_derivative(k, 1.0, 0);
  const Matrix d1 = monomial_derivative(k, 1.0, 1);
  for (int t = 0; t < fem_.num_triangles(); ++t) {
    for (int le = 0; le < 3; ++le) {
      const int tag = fem_.tri_edge_tags[t][le];
      if (tag < 0) continue;
      const CellGeometry g = cell_geometry(fem_, t);
      const std::vector<int>& conn = fem_.connectivity[t];
      const Vector2 pa = fem_.nodes[fem_.tri_vertices[t][le]];
      const Vector2 pb = fem_.nodes[fem_.tri_vertices[t][(le + 1) % 3]];
      const QuadratureRule equad = segment_quadrature(pa, pb, k + p + 2);
      std::vector<Vector2> ref_pts(equad.size());
      for (int q = 0; q < equad.size(); ++q) {
        ref_pts[q] = g.jac_inv * (equad.nodes[q] - g.origin);
      }
      const Matrix mono_lo = monomial_values(kRefFrame, k - 1, ref_pts);
      const Matrix dxi = mono_lo * (d0 * fem_.ref_nodal_coeffs);
      const Matrix deta = mono_lo * (d1 * fem_.ref_nodal_coeffs);
      const Matrix gx = g.jac_inv(0, 0) * dxi + g.jac_inv(1, 0) * deta;
      const Matrix gy = g.jac_inv(0, 1) * dxi + g.jac_inv(1, 1) * deta;
      Matrix px, py;
      eval_vector(perp, equad.nodes, px, py);
      const Vector2 normal = space.polygon().edges[tag].normal;
      for (int q = 0; q < equad.size(); ++q) {
        Scalar ux = 0, uy = 0, vx = 0, vy = 0;
        for (int s = 0; s < m; ++s) {
          ux += z[2 * conn[s]] * gx(q, s);
          uy += z[2 * conn[s]] * gy(q, s);
          vx += z[2 * conn[s] + 1] * gx(q, s);
          vy += z[2 * conn[s] + 1] * gy(q, s);
        }
        const Vector3 sigma = c3 * Vector3(ux, vy, (uy + vx) / kSqrt2);
        const Vector2 flux = traction(sigma, normal);
        for (int i = 0; i < ni; ++i) {
          acc[i] += equad.weights[q] * (flux.x() * px(q, i) + flux.y() * py(q, i));
        }
      }
    }
  }

  dofs.segment(space.interior_dof_offset(), ni) =
      (space.polygon().diameter / space.polygon().area) * acc;
  return dofs;
}

namespace {

// DOF_i(Phi_j) for the raw face/bulk basis problems: block-diagonal edge
// mass blocks and the weighted RM-orthogonal mass, all exact.
Matrix raw_dof_matrix(const HrLocalSpace& space) {
  const int n = space.num_dofs();
  Matrix d = Matrix::Zero(n, n);
  for (int e = 0; e < space.polygon().num_edges(); ++e) {
    const int off = space.edge_dof_offset(e);
    const int sz = 2 * (space.degree() + 1);
    d.block(off, off, sz, sz) = space.edge_mass(e) / space.polygon().edges[e].length;
  }
  const int ni = space.num_interior_dofs();
  if (ni > 0) {
    d.block(space.interior_dof_offset(), space.interior_dof_offset(), ni, ni) =
        (space.polygon().diameter / space.polygon().area) * space.perp_mass();
  }
  return d;
}

}  // namespace

ComplianceResult compliance_matrix(const HrLocalSpace& space, FemConfig config,
                                   RmGauge gauge) {
  LocalDisplacementSolver solver(space, config, gauge);
  const Matrix& z = solver.basis_displacements();
  const Matrix b_raw = solver.energy_matrix(z);
  const Matrix d = raw_dof_matrix(space);
  const Matrix d_inv = d.partialPivLu().solve(Matrix::Identity(d.rows(), d.cols()));
  Matrix b = d_inv.transpose() * b_raw * d_inv;
  b = 0.5 * (b + b.transpose());

  ComplianceResult result;
  result.matrix = b;
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  result.min_eigenvalue = es.eigenvalues().minCoeff();
  result.refinement_needed = result.min_eigenvalue <= 0.0;
  return result;
}

Scalar unisolvence_defect(const HrLocalSpace& space, FemConfig config) {
  LocalDisplacementSolver solver(space, config);
  const Matrix& z = solver.basis_displacements();
  const int n = space.num_dofs();
  Matrix mixed(n, n);
  int col = 0;
  for (int e = 0; e < space.polygon().num_edges(); ++e) {
    for (int mem = 0; mem < 2 * (space.degree() + 1); ++mem) {
      mixed.col(col) =
          solver.surrogate_dofs(z.col(col), face_problem_data(space, e, mem));
      ++col;
    }
  }
  for (int mem = 0; mem < space.num_interior_dofs(); ++mem) {
    mixed.col(col) = solver.surrogate_dofs(z.col(col), bulk_problem_data(space, mem));
    ++col;
  }
  const Matrix d = raw_dof_matrix(space);
  const Matrix check = d.partialPivLu().solve(Matrix::Identity(n, n));
  return (mixed * check - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace hrvem
