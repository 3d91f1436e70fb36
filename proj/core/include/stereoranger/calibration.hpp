#pragma once

#include <vector>

#include "stereoranger/geometry.hpp"
#include "stereoranger/image.hpp"

namespace stereoranger {

enum class CameraSide { Left, Right };

/// Chessboard geometry: inner corner grid and physical square size.
struct BoardSpec {
    int inner_rows = 6;
    int inner_cols = 9;
    double square_size_cm = 2.5;

    void validate() const;

    /// 3D board points in row-major grid order, Z = 0:
    /// point(r, c) = (c * square, r * square, 0).
    std::vector<WorldPoint> object_points() const;

    /// The same grid as 2D plane coordinates for homography estimation.
    std::vector<Vec2> plane_points() const;
};

/// Detected corner list for one (view, camera), row-major over the board grid.
struct CornerObservation {
    int view_id = 0;
    CameraSide camera = CameraSide::Left;
    std::vector<ImagePoint> corners;

    void validate(const BoardSpec& board, int frame_width = 0, int frame_height = 0) const;
};

struct CalibrationResult {
    CameraIntrinsics left;
    CameraIntrinsics right;
    std::vector<Pose> view_poses_left;   // board -> left camera, per view
    std::vector<Pose> view_poses_right;  // board -> right camera, per view
    Pose stereo;                         // right camera relative to left
    double rms_reprojection = 0.0;

    double baseline() const { return stereo.translation.norm(); }
};

/// Iteratively moves each guess to the zero of the gradient-orthogonality sum
/// over a (2*window+1)^2 neighborhood (classic saddle-point refinement),
/// sampling gradients bilinearly. Stops per point at max_iter or when the
/// update step drops below eps pixels. Throws OutOfBounds when a window
/// leaves the image and FlatRegion when the window holds no gradient energy.
std::vector<ImagePoint> refine_corners_subpixel(const Image8& image,
                                                const std::vector<ImagePoint>& guesses,
                                                int window, int max_iter, double eps);

/// Normalized-DLT homography from >= 4 non-collinear correspondences, scaled
/// so the bottom-right entry is 1 when nonzero. Throws
/// DegenerateConfiguration for collinear inputs.
Mat3 estimate_homography(const std::vector<Vec2>& plane_pts,
                         const std::vector<ImagePoint>& img_pts);

/// Closed-form zero-skew intrinsics from the homography orthogonality
/// constraints; distortion initialized to zero. Needs >= 3 distinct board
/// orientations. Throws InsufficientViews or IllConditioned.
CameraIntrinsics init_intrinsics(const std::vector<Mat3>& homographies,
                                 int frame_width, int frame_height);

/// Board pose from a homography given intrinsics; the mirror-ambiguous
/// solution with board Z > 0 in front of the camera is chosen.
Pose pose_from_homography(const CameraIntrinsics& intr, const Mat3& H);

/// Per-view relative poses R_r * R_l^T, t_r - R * t_l, averaged over views
/// (quaternion mean for rotation, arithmetic mean for translation).
/// Throws EmptyInput.
Pose solve_stereo_extrinsics(const std::vector<Pose>& left_poses,
                             const std::vector<Pose>& right_poses);

struct RefineOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-8;
    double initial_lambda = 1e-3;
};

/// Accepted-step cost history for convergence diagnostics.
struct RefineTrace {
    std::vector<double> accepted_costs;  // sum of squared residuals after each accepted step
    int iterations = 0;
};

/// Levenberg-Marquardt minimization of total squared reprojection error over
/// both intrinsics sets (including distortion), per-view left poses and the
/// stereo pose. Accepted steps never increase the cost; the returned RMS is
/// never above the input's. Throws NonConvergent if the iteration budget is
/// exhausted without a convergence signal.
CalibrationResult refine_calibration(const CalibrationResult& initial, const BoardSpec& board,
                                     const std::vector<CornerObservation>& observations,
                                     const RefineOptions& options = {},
                                     RefineTrace* trace = nullptr);

/// RMS reprojection error of `result` against the observations, as the root
/// mean squared corner distance in pixels.
double reprojection_rms(const CalibrationResult& result, const BoardSpec& board,
                        const std::vector<CornerObservation>& observations);

/// Full pipeline: homographies -> closed-form intrinsics -> pose
/// initialization -> stereo extrinsics -> joint refinement.
CalibrationResult calibrate_stereo(const BoardSpec& board,
                                   const std::vector<CornerObservation>& observations,
                                   int frame_width, int frame_height,
                                   const RefineOptions& options = {},
                                   RefineTrace* trace = nullptr);

/// Corner-list file: one line per corner `view_id camera grid_row grid_col x y`
/// with camera L or R, '#' comments.
std::vector<CornerObservation> load_corner_file(const std::string& path, const BoardSpec& board);
void save_corner_file(const std::vector<CornerObservation>& observations, const BoardSpec& board,
                      const std::string& path);

}  // namespace stereoranger
