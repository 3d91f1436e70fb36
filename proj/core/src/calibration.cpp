#include "stereoranger/calibration.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "stereoranger/errors.hpp"

namespace stereoranger {

void BoardSpec::validate() const {
    if (inner_rows < 2 || inner_cols < 2)
        throw InvalidArgument("board must have at least 2x2 inner corners");
    if (!(square_size_cm > 0.0))
        throw InvalidArgument("square size must be positive");
}

std::vector<WorldPoint> BoardSpec::object_points() const {
    std::vector<WorldPoint> pts;
    pts.reserve(static_cast<std::size_t>(inner_rows) * inner_cols);
    for (int r = 0; r < inner_rows; ++r)
        for (int c = 0; c < inner_cols; ++c)
            pts.push_back({c * square_size_cm, r * square_size_cm, 0.0});
    return pts;
}

std::vector<Vec2> BoardSpec::plane_points() const {
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(inner_rows) * inner_cols);
    for (int r = 0; r < inner_rows; ++r)
        for (int c = 0; c < inner_cols; ++c)
            pts.emplace_back(c * square_size_cm, r * square_size_cm);
    return pts;
}

void CornerObservation::validate(const BoardSpec& board, int frame_width, int frame_height) const {
    board.validate();
    const std::size_t expected = static_cast<std::size_t>(board.inner_rows) * board.inner_cols;
    if (corners.size() != expected)
        throw InvalidArgument("corner count does not match the board grid");
    for (const ImagePoint& p : corners) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidArgument("corner coordinates must be finite");
        if (frame_width > 0 && (p.x < 0.0 || p.x > frame_width - 1.0))
            throw InvalidArgument("corner x outside frame bounds");
        if (frame_height > 0 && (p.y < 0.0 || p.y > frame_height - 1.0))
            throw InvalidArgument("corner y outside frame bounds");
    }
}

// ---------------------------------------------------------------------------
// sub-pixel corner refinement
// ---------------------------------------------------------------------------

std::vector<ImagePoint> refine_corners_subpixel(const Image8& image,
                                                const std::vector<ImagePoint>& guesses,
                                                int window, int max_iter, double eps) {
    if (window < 2)
        throw InvalidArgument("refinement window must be at least 2");
    if (max_iter < 1 || !(eps > 0.0))
        throw InvalidArgument("max_iter must be >= 1 and eps positive");
    const double margin = window + 1.0;  // gradient sampling needs one extra pixel
    const auto in_margin = [&](double x, double y) {
        return x >= margin && x <= image.width() - 1.0 - margin && y >= margin &&
               y <= image.height() - 1.0 - margin;
    };

    // Gaussian window weights, sigma = window / 2
    const int n = 2 * window + 1;
    std::vector<double> weight(static_cast<std::size_t>(n) * n);
    const double sigma2 = 0.25 * window * window;
    for (int dy = -window; dy <= window; ++dy)
        for (int dx = -window; dx <= window; ++dx)
            weight[static_cast<std::size_t>(dy + window) * n + (dx + window)] =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma2));

    std::vector<ImagePoint> refined;
    refined.reserve(guesses.size());
    for (const ImagePoint& guess : guesses) {
        if (!in_margin(guess.x, guess.y))
            throw OutOfBounds("corner guess too close to the image border");
        double qx = guess.x;
        double qy = guess.y;
        for (int it = 0; it < max_iter; ++it) {
            Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
            Vec2 b = Vec2::Zero();
            for (int dy = -window; dy <= window; ++dy) {
                for (int dx = -window; dx <= window; ++dx) {
                    const double px = qx + dx;
                    const double py = qy + dy;
                    const double gx = 0.5 * (image.sample(px + 1.0, py) - image.sample(px - 1.0, py));
                    const double gy = 0.5 * (image.sample(px, py + 1.0) - image.sample(px, py - 1.0));
                    const double w = weight[static_cast<std::size_t>(dy + window) * n + (dx + window)];
                    A(0, 0) += w * gx * gx;
                    A(0, 1) += w * gx * gy;
                    A(1, 1) += w * gy * gy;
                    b.x() += w * (gx * gx * px + gx * gy * py);
                    b.y() += w * (gx * gy * px + gy * gy * py);
                }
            }
            A(1, 0) = A(0, 1);
            const double tr = A.trace();
            if (tr < 1e-9)
                throw FlatRegion("no gradient energy in the refinement window");
            if (std::abs(A.determinant()) < 1e-12 * tr * tr)
                break;  // aperture-degenerate (single edge); keep the current point
            const Vec2 q_new = A.ldlt().solve(b);
            const double step = std::hypot(q_new.x() - qx, q_new.y() - qy);
            qx = q_new.x();
            qy = q_new.y();
            if (!in_margin(qx, qy))
                throw OutOfBounds("refinement window left the image");
            if (step < eps)
                break;
        }
        refined.push_back({qx, qy});
    }
    return refined;
}

// ---------------------------------------------------------------------------
// homography estimation (normalized DLT)
// ---------------------------------------------------------------------------

namespace {

struct Normalization {
    Eigen::MatrixX2d pts;
    Mat3 T = Mat3::Identity();
};

Normalization normalize_points(const Eigen::MatrixX2d& pts) {
    const auto n = pts.rows();
    const double mx = pts.col(0).mean();
    const double my = pts.col(1).mean();
    double mean_dist = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        mean_dist += std::hypot(pts(i, 0) - mx, pts(i, 1) - my);
    mean_dist /= static_cast<double>(n);
    const double s = (mean_dist < 1e-12) ? 1.0 : std::sqrt(2.0) / mean_dist;
    Normalization out;
    out.T << s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0;
    out.pts.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.pts(i, 0) = s * (pts(i, 0) - mx);
        out.pts(i, 1) = s * (pts(i, 1) - my);
    }
    return out;
}

bool points_collinear(const Eigen::MatrixX2d& pts) {
    const Eigen::RowVector2d mean = pts.colwise().mean();
    const Eigen::MatrixX2d centered = pts.rowwise() - mean;
    const Eigen::Matrix2d cov = centered.transpose() * centered;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    return eig.eigenvalues()(0) < 1e-10 * std::max(eig.eigenvalues()(1), 1e-12);
}

}  // namespace

Mat3 estimate_homography(const std::vector<Vec2>& plane_pts,
                         const std::vector<ImagePoint>& img_pts) {
    if (plane_pts.size() != img_pts.size())
        throw InvalidArgument("correspondence count mismatch");
    if (plane_pts.size() < 4)
        throw InvalidArgument("homography needs at least 4 correspondences");
    const auto n = static_cast<Eigen::Index>(plane_pts.size());
    Eigen::MatrixX2d P(n, 2), Q(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        P.row(i) = plane_pts[static_cast<std::size_t>(i)].transpose();
        Q(i, 0) = img_pts[static_cast<std::size_t>(i)].x;
        Q(i, 1) = img_pts[static_cast<std::size_t>(i)].y;
    }
    if (points_collinear(P) || points_collinear(Q))
        throw DegenerateConfiguration("homography correspondences are collinear");

    const Normalization np = normalize_points(P);
    const Normalization nq = normalize_points(Q);
    Eigen::MatrixXd A(2 * n, 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double X = np.pts(i, 0), Y = np.pts(i, 1);
        const double u = nq.pts(i, 0), v = nq.pts(i, 1);
        A.row(2 * i) << -X, -Y, -1.0, 0.0, 0.0, 0.0, u * X, u * Y, u;
        A.row(2 * i + 1) << 0.0, 0.0, 0.0, -X, -Y, -1.0, v * X, v * Y, v;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Mat3 Hn;
    Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    Mat3 H = nq.T.inverse() * Hn * np.T;
    if (std::abs(H(2, 2)) > 1e-12)
        H /= H(2, 2);
    if (!H.allFinite())
        throw DegenerateConfiguration("homography solve produced non-finite entries");
    return H;
}

// ---------------------------------------------------------------------------
// Zhang closed-form intrinsics (zero skew)
// ---------------------------------------------------------------------------

namespace {

// h_i^T B h_j with B = [B11 0 B13; 0 B22 B23; B13 B23 B33], b = (B11,B22,B13,B23,B33)
Eigen::Matrix<double, 5, 1> orthogonality_row(const Mat3& H, int i, int j) {
    Eigen::Matrix<double, 5, 1> v;
    v << H(0, i) * H(0, j),
         H(1, i) * H(1, j),
         H(2, i) * H(0, j) + H(0, i) * H(2, j),
         H(2, i) * H(1, j) + H(1, i) * H(2, j),
         H(2, i) * H(2, j);
    return v;
}

}  // namespace

CameraIntrinsics init_intrinsics(const std::vector<Mat3>& homographies,
                                 int frame_width, int frame_height) {
    if (homographies.size() < 3)
        throw InsufficientViews("intrinsics initialization needs at least 3 views");
    const auto n = static_cast<Eigen::Index>(homographies.size());
    Eigen::MatrixXd V(2 * n, 5);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Mat3& H = homographies[static_cast<std::size_t>(k)];
        V.row(2 * k) = orthogonality_row(H, 0, 1).transpose();
        V.row(2 * k + 1) = (orthogonality_row(H, 0, 0) - orthogonality_row(H, 1, 1)).transpose();
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(3) < 1e-9 * sv(0))
        throw IllConditioned("board orientations do not constrain the intrinsics");
    Eigen::VectorXd b = svd.matrixV().col(4);
    if (b(0) < 0.0)
        b = -b;
    const double B11 = b(0), B22 = b(1), B13 = b(2), B23 = b(3), B33 = b(4);
    if (!(B11 > 0.0) || !(B22 > 0.0))
        throw IllConditioned("recovered conic is not positive definite");
    const double cy = -B23 / B22;
    const double lambda = B33 - B13 * B13 / B11 - B23 * B23 / B22;
    if (!(lambda > 0.0))
        throw IllConditioned("recovered conic is not positive definite");
    CameraIntrinsics intr;
    intr.fx = std::sqrt(lambda / B11);
    intr.fy = std::sqrt(lambda / B22);
    intr.cx = -B13 * intr.fx * intr.fx / lambda;
    intr.cy = cy;
    try {
        intr.validate(frame_width, frame_height);
    } catch (const InvalidArgument& e) {
        throw IllConditioned(std::string("closed-form intrinsics implausible: ") + e.what());
    }
    return intr;
}

Pose pose_from_homography(const CameraIntrinsics& intr, const Mat3& H) {
    Mat3 K;
    K << intr.fx, 0.0, intr.cx, 0.0, intr.fy, intr.cy, 0.0, 0.0, 1.0;
    const Mat3 invK = K.inverse();
    Vec3 r1 = invK * H.col(0);
    Vec3 r2 = invK * H.col(1);
    Vec3 t = invK * H.col(2);
    const double scale = 2.0 / (r1.norm() + r2.norm());
    r1 *= scale;
    r2 *= scale;
    t *= scale;
    if (t.z() < 0.0) {  // mirror ambiguity: board must sit in front of the camera
        r1 = -r1;
        r2 = -r2;
        t = -t;
    }
    Mat3 R;
    R.col(0) = r1;
    R.col(1) = r2;
    R.col(2) = r1.cross(r2);
    // snap to the nearest rotation
    const Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0.0) {
        Mat3 U = svd.matrixU();
        U.col(2) *= -1.0;
        R = U * svd.matrixV().transpose();
    }
    return {R, t};
}

Pose solve_stereo_extrinsics(const std::vector<Pose>& left_poses,
                             const std::vector<Pose>& right_poses) {
    if (left_poses.empty())
        throw EmptyInput("no poses to average");
    if (left_poses.size() != right_poses.size())
        throw InvalidArgument("pose lists must have equal length");
    Eigen::Vector4d quat_sum = Eigen::Vector4d::Zero();
    Vec3 t_sum = Vec3::Zero();
    Eigen::Quaterniond first;
    for (std::size_t i = 0; i < left_poses.size(); ++i) {
        const Mat3 R = right_poses[i].rotation * left_poses[i].rotation.transpose();
        const Vec3 t = right_poses[i].translation - R * left_poses[i].translation;
        Eigen::Quaterniond q(R);
        if (i == 0)
            first = q;
        else if (q.coeffs().dot(first.coeffs()) < 0.0)
            q.coeffs() = -q.coeffs();
        quat_sum += q.coeffs();
        t_sum += t;
    }
    Eigen::Quaterniond mean;
    mean.coeffs() = quat_sum.normalized();
    return {mean.toRotationMatrix(), t_sum / static_cast<double>(left_poses.size())};
}

// ---------------------------------------------------------------------------
// joint refinement (Levenberg-Marquardt over numeric Jacobians)
// ---------------------------------------------------------------------------

namespace {

struct ViewObs {
    int view_id;
    const CornerObservation* left;
    const CornerObservation* right;
};

std::vector<ViewObs> group_views(const std::vector<CornerObservation>& observations) {
    std::map<int, ViewObs> by_view;
    for (const CornerObservation& obs : observations) {
        ViewObs& v = by_view.try_emplace(obs.view_id, ViewObs{obs.view_id, nullptr, nullptr}).first->second;
        const CornerObservation*& slot = (obs.camera == CameraSide::Left) ? v.left : v.right;
        if (slot != nullptr)
            throw InvalidArgument("duplicate observation for view " + std::to_string(obs.view_id));
        slot = &obs;
    }
    std::vector<ViewObs> views;
    views.reserve(by_view.size());
    for (const auto& [id, v] : by_view) {
        if (v.left == nullptr || v.right == nullptr)
            throw InvalidArgument("view " + std::to_string(id) + " lacks one camera's observations");
        views.push_back(v);
    }
    return views;
}

constexpr int kIntrParams = 9;  // fx fy cx cy k1 k2 p1 p2 k3
constexpr int kPoseParams = 6;  // axis-angle + translation
constexpr int kLeftBase = 0;
constexpr int kRightBase = kIntrParams;
constexpr int kStereoBase = 2 * kIntrParams;
constexpr int kViewBase = kStereoBase + kPoseParams;

int view_param_base(int v) { return kViewBase + kPoseParams * v; }

CameraIntrinsics unpack_intrinsics(const Eigen::VectorXd& x, int base) {
    CameraIntrinsics intr;
    intr.fx = x(base + 0);
    intr.fy = x(base + 1);
    intr.cx = x(base + 2);
    intr.cy = x(base + 3);
    for (int i = 0; i < 5; ++i)
        intr.dist[static_cast<std::size_t>(i)] = x(base + 4 + i);
    return intr;
}

Pose unpack_pose(const Eigen::VectorXd& x, int base) {
    const Vec3 r(x(base), x(base + 1), x(base + 2));
    const Vec3 t(x(base + 3), x(base + 4), x(base + 5));
    return {rotation_from_axis_angle(r), t};
}

void pack_intrinsics(Eigen::VectorXd& x, int base, const CameraIntrinsics& intr) {
    x(base + 0) = intr.fx;
    x(base + 1) = intr.fy;
    x(base + 2) = intr.cx;
    x(base + 3) = intr.cy;
    for (int i = 0; i < 5; ++i)
        x(base + 4 + i) = intr.dist[static_cast<std::size_t>(i)];
}

void pack_pose(Eigen::VectorXd& x, int base, const Pose& pose) {
    const Vec3 r = axis_angle_from_rotation(pose.rotation);
    x(base + 0) = r.x();
    x(base + 1) = r.y();
    x(base + 2) = r.z();
    x(base + 3) = pose.translation.x();
    x(base + 4) = pose.translation.y();
    x(base + 5) = pose.translation.z();
}

class ReprojectionProblem {
public:
    ReprojectionProblem(const BoardSpec& board, const std::vector<ViewObs>& views)
        : board_points_(board.object_points()), views_(views) {
        corners_per_view_ = static_cast<int>(board_points_.size());
        residuals_per_view_ = 4 * corners_per_view_;  // 2 coords x 2 cameras
    }

    int num_views() const { return static_cast<int>(views_.size()); }
    int num_params() const { return kViewBase + kPoseParams * num_views(); }
    int num_residuals() const { return residuals_per_view_ * num_views(); }
    int residuals_per_view() const { return residuals_per_view_; }

    /// Residuals of one view: left camera (2 per corner) then right camera.
    /// Returns false when any board point projects behind a camera.
    bool eval_view(const Eigen::VectorXd& x, int v, double* out) const {
        const CameraIntrinsics left = unpack_intrinsics(x, kLeftBase);
        const CameraIntrinsics right = unpack_intrinsics(x, kRightBase);
        const Pose stereo = unpack_pose(x, kStereoBase);
        const Pose pose_l = unpack_pose(x, view_param_base(v));
        const Pose pose_r = stereo.compose_after(pose_l);
        const ViewObs& obs = views_[static_cast<std::size_t>(v)];
        for (int j = 0; j < corners_per_view_; ++j) {
            const WorldPoint& pt = board_points_[static_cast<std::size_t>(j)];
            try {
                const ImagePoint pl = project(left, pose_l, pt);
                const ImagePoint pr = project(right, pose_r, pt);
                out[2 * j] = pl.x - obs.left->corners[static_cast<std::size_t>(j)].x;
                out[2 * j + 1] = pl.y - obs.left->corners[static_cast<std::size_t>(j)].y;
                out[2 * corners_per_view_ + 2 * j] =
                    pr.x - obs.right->corners[static_cast<std::size_t>(j)].x;
                out[2 * corners_per_view_ + 2 * j + 1] =
                    pr.y - obs.right->corners[static_cast<std::size_t>(j)].y;
            } catch (const PointBehindCamera&) {
                return false;
            }
        }
        return true;
    }

    bool eval_all(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        r.resize(num_residuals());
        for (int v = 0; v < num_views(); ++v)
            if (!eval_view(x, v, r.data() + static_cast<std::ptrdiff_t>(v) * residuals_per_view_))
                return false;
        return true;
    }

    /// Central-difference Jacobian exploiting the block structure: intrinsics
    /// and the stereo pose touch every view, view poses only their own rows.
    bool jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& J) const {
        J.setZero(num_residuals(), num_params());
        Eigen::VectorXd xp = x;
        std::vector<double> plus(static_cast<std::size_t>(residuals_per_view_));
        std::vector<double> minus(static_cast<std::size_t>(residuals_per_view_));
        const auto column = [&](int p, int v_begin, int v_end) {
            const double h = 1e-6 * std::max(1.0, std::abs(x(p)));
            for (int v = v_begin; v < v_end; ++v) {
                xp(p) = x(p) + h;
                if (!eval_view(xp, v, plus.data()))
                    return false;
                xp(p) = x(p) - h;
                if (!eval_view(xp, v, minus.data()))
                    return false;
                const int row0 = v * residuals_per_view_;
                for (int i = 0; i < residuals_per_view_; ++i)
                    J(row0 + i, p) = (plus[static_cast<std::size_t>(i)] -
                                      minus[static_cast<std::size_t>(i)]) / (2.0 * h);
            }
            xp(p) = x(p);
            return true;
        };
        for (int p = 0; p < kViewBase; ++p)
            if (!column(p, 0, num_views()))
                return false;
        for (int v = 0; v < num_views(); ++v)
            for (int p = view_param_base(v); p < view_param_base(v) + kPoseParams; ++p)
                if (!column(p, v, v + 1))
                    return false;
        return true;
    }

private:
    std::vector<WorldPoint> board_points_;
    std::vector<ViewObs> views_;
    int corners_per_view_ = 0;
    int residuals_per_view_ = 0;
};

CalibrationResult result_from_params(const Eigen::VectorXd& x, int num_views, double cost,
                                     int num_points) {
    CalibrationResult out;
    out.left = unpack_intrinsics(x, kLeftBase);
    out.right = unpack_intrinsics(x, kRightBase);
    out.stereo = unpack_pose(x, kStereoBase);
    out.view_poses_left.reserve(static_cast<std::size_t>(num_views));
    out.view_poses_right.reserve(static_cast<std::size_t>(num_views));
    for (int v = 0; v < num_views; ++v) {
        const Pose pl = unpack_pose(x, view_param_base(v));
        out.view_poses_left.push_back(pl);
        out.view_poses_right.push_back(out.stereo.compose_after(pl));
    }
    out.rms_reprojection = std::sqrt(cost / std::max(1, num_points));
    return out;
}

}  // namespace

CalibrationResult refine_calibration(const CalibrationResult& initial, const BoardSpec& board,
                                     const std::vector<CornerObservation>& observations,
                                     const RefineOptions& options, RefineTrace* trace) {
    board.validate();
    for (const CornerObservation& obs : observations)
        obs.validate(board);
    const std::vector<ViewObs> views = group_views(observations);
    if (views.empty())
        throw EmptyInput("no observations to refine against");
    if (initial.view_poses_left.size() != views.size())
        throw InvalidArgument("initial result must carry one left pose per view");

    const ReprojectionProblem problem(board, views);
    const int num_points = problem.num_residuals() / 2;

    Eigen::VectorXd x(problem.num_params());
    pack_intrinsics(x, kLeftBase, initial.left);
    pack_intrinsics(x, kRightBase, initial.right);
    pack_pose(x, kStereoBase, initial.stereo);
    for (int v = 0; v < problem.num_views(); ++v)
        pack_pose(x, view_param_base(v), initial.view_poses_left[static_cast<std::size_t>(v)]);

    Eigen::VectorXd r;
    if (!problem.eval_all(x, r))
        throw InvalidArgument("initial calibration projects board points behind a camera");
    double cost = r.squaredNorm();
    if (trace) {
        trace->accepted_costs.assign(1, cost);
        trace->iterations = 0;
    }
    // residuals already at the numeric noise floor: nothing to optimize
    const double cost_floor = 1e-20 * problem.num_residuals();
    if (cost <= cost_floor)
        return result_from_params(x, problem.num_views(), cost, num_points);

    double lambda = options.initial_lambda;
    Eigen::MatrixXd J;
    Eigen::VectorXd r_try;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (!problem.jacobian(x, J))
            throw NonConvergent("Jacobian evaluation left the valid projection domain");
        const Eigen::VectorXd g = 2.0 * (J.transpose() * r);
        if (g.lpNorm<Eigen::Infinity>() < options.gradient_tol)
            return result_from_params(x, problem.num_views(), cost, num_points);

        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd Jtr = J.transpose() * r;
        Eigen::VectorXd diag = JtJ.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        while (lambda <= 1e14) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * diag;
            const Eigen::VectorXd delta = A.ldlt().solve(-Jtr);
            const Eigen::VectorXd x_try = x + delta;
            if (problem.eval_all(x_try, r_try)) {
                const double cost_try = r_try.squaredNorm();
                if (cost_try < cost) {
                    const double rel_drop = (cost - cost_try) / std::max(cost, 1e-300);
                    x = x_try;
                    r.swap(r_try);
                    cost = cost_try;
                    lambda = std::max(lambda * 0.1, 1e-12);
                    accepted = true;
                    if (trace) {
                        trace->accepted_costs.push_back(cost);
                        trace->iterations = iter + 1;
                    }
                    if (rel_drop < 1e-15 ||
                        delta.norm() < 1e-14 * (x.norm() + 1e-14))
                        return result_from_params(x, problem.num_views(), cost, num_points);
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted)  // no downhill step within numeric range: local minimum
            return result_from_params(x, problem.num_views(), cost, num_points);
    }
    throw NonConvergent("calibration refinement exhausted its iteration budget");
}

double reprojection_rms(const CalibrationResult& result, const BoardSpec& board,
                        const std::vector<CornerObservation>& observations) {
    const std::vector<ViewObs> views = group_views(observations);
    const std::vector<WorldPoint> board_points = board.object_points();
    double sum = 0.0;
    long count = 0;
    for (std::size_t v = 0; v < views.size(); ++v) {
        for (int cam = 0; cam < 2; ++cam) {
            const CornerObservation* obs = (cam == 0) ? views[v].left : views[v].right;
            const CameraIntrinsics& intr = (cam == 0) ? result.left : result.right;
            const Pose& pose = (cam == 0) ? result.view_poses_left[v] : result.view_poses_right[v];
            for (std::size_t j = 0; j < board_points.size(); ++j) {
                const ImagePoint p = project(intr, pose, board_points[j]);
                const double du = p.x - obs->corners[j].x;
                const double dv = p.y - obs->corners[j].y;
                sum += du * du + dv * dv;
                ++count;
            }
        }
    }
    return std::sqrt(sum / std::max<long>(1, count));
}

CalibrationResult calibrate_stereo(const BoardSpec& board,
                                   const std::vector<CornerObservation>& observations,
                                   int frame_width, int frame_height,
                                   const RefineOptions& options, RefineTrace* trace) {
    board.validate();
    for (const CornerObservation& obs : observations)
        obs.validate(board, frame_width, frame_height);
    const std::vector<ViewObs> views = group_views(observations);
    if (views.size() < 3)
        throw InsufficientViews("stereo calibration needs at least 3 views");

    const std::vector<Vec2> plane = board.plane_points();
    std::vector<Mat3> h_left, h_right;
    h_left.reserve(views.size());
    h_right.reserve(views.size());
    for (const ViewObs& v : views) {
        h_left.push_back(estimate_homography(plane, v.left->corners));
        h_right.push_back(estimate_homography(plane, v.right->corners));
    }

    CalibrationResult init;
    init.left = init_intrinsics(h_left, frame_width, frame_height);
    init.right = init_intrinsics(h_right, frame_width, frame_height);
    for (std::size_t v = 0; v < views.size(); ++v) {
        init.view_poses_left.push_back(pose_from_homography(init.left, h_left[v]));
        init.view_poses_right.push_back(pose_from_homography(init.right, h_right[v]));
    }
    init.stereo = solve_stereo_extrinsics(init.view_poses_left, init.view_poses_right);
    init.rms_reprojection = reprojection_rms(init, board, observations);
    return refine_calibration(init, board, observations, options, trace);
}

// ---------------------------------------------------------------------------
// corner-list file I/O
// ---------------------------------------------------------------------------

std::vector<CornerObservation> load_corner_file(const std::string& path, const BoardSpec& board) {
    board.validate();
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open corner file '" + path + "'");
    const int rows = board.inner_rows;
    const int cols = board.inner_cols;
    const std::size_t per_view = static_cast<std::size_t>(rows) * cols;

    std::map<std::pair<int, int>, std::pair<std::vector<ImagePoint>, std::vector<bool>>> grids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        int view_id, grid_row, grid_col;
        std::string camera;
        double x, y;
        if (!(ss >> view_id))
            continue;
        if (!(ss >> camera >> grid_row >> grid_col >> x >> y))
            throw FormatError("corner", line_no, "expected `view_id camera grid_row grid_col x y`");
        if (camera != "L" && camera != "R")
            throw FormatError("corner", line_no, "camera must be L or R");
        if (grid_row < 0 || grid_row >= rows || grid_col < 0 || grid_col >= cols)
            throw FormatError("corner", line_no, "grid position outside the board");
        auto& [pts, filled] = grids[{view_id, camera == "L" ? 0 : 1}];
        if (pts.empty()) {
            pts.resize(per_view);
            filled.assign(per_view, false);
        }
        const std::size_t idx = static_cast<std::size_t>(grid_row) * cols + grid_col;
        if (filled[idx])
            throw FormatError("corner", line_no, "duplicate grid position");
        pts[idx] = {x, y};
        filled[idx] = true;
    }
    std::vector<CornerObservation> out;
    for (auto& [key, grid] : grids) {
        for (std::size_t i = 0; i < per_view; ++i)
            if (!grid.second[i])
                throw FormatError("corner", line_no,
                                  "view " + std::to_string(key.first) + " is missing corners");
        CornerObservation obs;
        obs.view_id = key.first;
        obs.camera = key.second == 0 ? CameraSide::Left : CameraSide::Right;
        obs.corners = std::move(grid.first);
        out.push_back(std::move(obs));
    }
    return out;
}

void save_corner_file(const std::vector<CornerObservation>& observations, const BoardSpec& board,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << "# view_id camera grid_row grid_col x y\n";
    out.precision(17);
    for (const CornerObservation& obs : observations) {
        const char cam = obs.camera == CameraSide::Left ? 'L' : 'R';
        for (int r = 0; r < board.inner_rows; ++r)
            for (int c = 0; c < board.inner_cols; ++c) {
                const ImagePoint& p = obs.corners[static_cast<std::size_t>(r) * board.inner_cols + c];
                out << obs.view_id << ' ' << cam << ' ' << r << ' ' << c << ' ' << p.x << ' '
                    << p.y << '\n';
            }
    }
}

}  // namespace stereoranger
