#pragma once

#include <string>
#include <vector>

#include "octvf/augment.hpp"
#include "octvf/container.hpp"
#include "octvf/model.hpp"
#include "octvf/split.hpp"

namespace octvf {

enum class Target { MD, Thresholds };

std::string target_name(Target t);
Target parse_target(const std::string& name);

/// Training protocol: Adam from lr0, fixed steps per epoch sampled with
/// replacement, plateau schedule on validation loss, best checkpoint by
/// highest validation R2, early stop on validation loss.
struct TrainConfig {
    double lr0 = 1e-4;
    int batch_size = 4;
    int steps_per_epoch = 300;
    int plateau_patience = 10;
    double plateau_factor = 0.75;
    int max_epochs = 200;
    int early_stop_patience = 30;
    Target target = Target::Thresholds;
    Modality modality = Modality::Ring47;
    uint64_t seed = 0;

    void validate() const;
};

/// One preprocessed sample: modality image at model input size, [0,1].
struct TrainSample {
    RasterImage image;
    VFExam vf;
    uint64_t sample_id = 0;  // container ordinal, drives the augment stream
};

struct Dataset {
    std::vector<TrainSample> samples;

    /// Pulls `refs` out of `exams`, resizing the modality image to the model
    /// input dimensions. Throws if the modality image is missing.
    static Dataset from_exams(const std::vector<ExamPair>& exams,
                              const std::vector<size_t>& refs, Modality modality, int input_w,
                              int input_h);

    Eigen::MatrixXd targets(Target t) const;
    std::vector<std::string> ids() const;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0, val_loss = 0, val_r2 = 0, lr = 0;
};

struct TrainResult {
    std::string best_checkpoint;  // serialized checkpoint bytes
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_r2 = 0.0;
    uint64_t samples_drawn = 0;
};

TrainResult fit(const Dataset& train, const Dataset& val, const ModelSpec& spec,
                const TrainConfig& config, const AugmentConfig& augment);

/// Deterministic infer-mode predictions, one row per sample.
Eigen::MatrixXd predict_batch(Model<float>& model, const Dataset& data);

/// Elementwise arithmetic mean of equally shaped prediction matrices.
Eigen::MatrixXd ensemble_average(const std::vector<Eigen::MatrixXd>& predictions);

/// `epoch,train_loss,val_loss,val_r2,lr`
std::string training_log_csv(const std::vector<EpochLog>& log);

struct PredictionsFile {
    std::string target;  // "md" | "thresholds"
    std::vector<std::string> exam_ids;
    Eigen::MatrixXd values;
};

/// `exam_id,target,c01..c52` (c01 only for MD).
std::string predictions_csv(const PredictionsFile& p);
PredictionsFile parse_predictions_csv(const std::string& text);

}  // namespace octvf
