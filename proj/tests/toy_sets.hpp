#pragma once

// Fixed epsilon-SVR toy problems with reference dual optima computed
// offline by an interior-point QP solver.

#include <string>
#include <vector>

#include "grassdisagg/features.hpp"
#include "grassdisagg/svr.hpp"

namespace toy {

struct SvrToySet {
    std::string name;
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    double gamma;
    double c_box;
    double epsilon;
    double reference_objective;

    grassdisagg::FeatureMatrix matrix() const {
        grassdisagg::FeatureMatrix m;
        for (const auto& row : x) m.append_row(row);
        return m;
    }
    grassdisagg::SvrParams params() const {
        grassdisagg::SvrParams p;
        p.c_box = c_box;
        p.epsilon = epsilon;
        p.gamma = gamma;
        p.tolerance = 1e-6;
        return p;
    }
};

inline std::vector<SvrToySet> svr_toy_sets() {
    return {
        {"toy1d",
         {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}, {5.0}},
         {0.0, 0.84, 0.91, 0.14, -0.76, -0.96},
         0.5,
         10.0,
         0.1,
         -0.821243338594},
        {"toy2d",
         {{0.0, 0.0}, {1.0, 0.5}, {0.5, 1.5}, {2.0, 1.0}, {1.5, 2.5}, {3.0, 0.0}, {2.5, 2.0}, {0.0, 3.0}},
         {1.0, 1.8, 2.1, 3.2, 3.9, 3.1, 4.6, 2.9},
         0.3,
         1.0,
         0.2,
         -2.451266931562},
        {"toy3d",
         {{0.1, 0.2, 0.3},
          {0.9, 0.1, 0.4},
          {0.4, 0.8, 0.2},
          {0.7, 0.6, 0.9},
          {0.2, 0.9, 0.7},
          {0.8, 0.3, 0.1},
          {0.5, 0.5, 0.5},
          {0.3, 0.1, 0.8},
          {0.6, 0.9, 0.4},
          {0.0, 0.4, 0.6}},
         {0.5, -1.2, 2.0, 0.3, 1.7, -0.8, 0.9, -0.1, 2.2, 0.6},
         1.0,
         0.5,
         0.05,
         -3.266193811067},
    };
}

}  // namespace toy
