#pragma once

#include <limits>
#include <vector>

#include "octvf/common.hpp"

namespace octvf {

/// Reduce-on-plateau: after `patience` consecutive epochs without improving
/// the best validation loss, the rate is multiplied by `factor`; the counter
/// resets on improvement and on each reduction.
class PlateauScheduler {
public:
    PlateauScheduler(double lr0, int patience, double factor)
        : lr_(lr0), patience_(patience), factor_(factor) {
        if (patience < 1) throw Error("plateau scheduler: patience must be >= 1");
        if (!(factor > 0.0 && factor < 1.0)) {
            throw Error("plateau scheduler: factor must be in (0,1)");
        }
    }

    /// Feeds one epoch's validation loss; returns the rate for the next epoch.
    double observe(double val_loss) {
        if (val_loss < best_) {
            best_ = val_loss;
            since_improve_ = 0;
        } else {
            ++since_improve_;
            if (since_improve_ >= patience_) {
                lr_ *= factor_;
                since_improve_ = 0;
            }
        }
        return lr_;
    }

    double lr() const { return lr_; }

private:
    double lr_;
    int patience_;
    double factor_;
    double best_ = std::numeric_limits<double>::infinity();
    int since_improve_ = 0;
};

/// Replays a per-epoch validation loss history and returns the final rate.
inline double plateau_scheduler(const std::vector<double>& history, int patience, double factor,
                                double lr0) {
    PlateauScheduler sched(lr0, patience, factor);
    for (double loss : history) sched.observe(loss);
    return sched.lr();
}

}  // namespace octvf
