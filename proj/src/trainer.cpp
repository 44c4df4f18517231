#include "octvf/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "octvf/adam.hpp"
#include "octvf/csv.hpp"
#include "octvf/metrics.hpp"
#include "octvf/schedule.hpp"

namespace octvf {

std::string target_name(Target t) {
    return t == Target::MD ? "md" : "thresholds";
}

Target parse_target(const std::string& name) {
    if (name == "md") return Target::MD;
    if (name == "thresholds") return Target::Thresholds;
    throw Error("unknown target '" + name + "', expected md or thresholds");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
    if (steps_per_epoch < 1) throw Error("train config: steps_per_epoch must be >= 1");
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
        throw Error("train config: plateau_factor must be in (0,1)");
    }
    if (plateau_patience < 1) throw Error("train config: plateau_patience must be >= 1");
    if (max_epochs < 1) throw Error("train config: max_epochs must be >= 1");
    if (early_stop_patience < 1) throw Error("train config: early_stop_patience must be >= 1");
    if (!(lr0 > 0.0)) throw Error("train config: lr0 must be > 0");
}

Dataset Dataset::from_exams(const std::vector<ExamPair>& exams, const std::vector<size_t>& refs,
                            Modality modality, int input_w, int input_h) {
    Dataset out;
    out.samples.reserve(refs.size());
    for (size_t ref : refs) {
        const ExamPair& exam = exams.at(ref);
        const RasterImage& img = modality_image(exam, modality);
        if (img.width == 0 || img.height == 0) {
            throw Error("exam " + exam_id(ref) + " is missing the " + modality_name(modality) +
                        " image");
        }
        TrainSample s;
        s.image = (img.width == input_w && img.height == input_h)
                      ? img
                      : resize_bilinear(img, input_w, input_h);
        s.vf = exam.vf;
        s.sample_id = ref;
        out.samples.push_back(std::move(s));
    }
    return out;
}

Eigen::MatrixXd Dataset::targets(Target t) const {
    const int cols = t == Target::MD ? 1 : kActivePoints;
    Eigen::MatrixXd out(samples.size(), cols);
    for (size_t i = 0; i < samples.size(); ++i) {
        if (t == Target::MD) {
            out(i, 0) = samples[i].vf.md;
        } else {
            out.row(i) = samples[i].vf.thresholds.cast<double>().transpose();
        }
    }
    return out;
}

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(exam_id(s.sample_id));
    return out;
}

namespace {

void fill_target_row(Tensor<float>& batch_target, int row, const VFExam& vf, Target t) {
    if (t == Target::MD) {
        batch_target(row, 0, 0, 0) = vf.md;
    } else {
        for (int j = 0; j < kActivePoints; ++j) batch_target(row, j, 0, 0) = vf.thresholds[j];
    }
}

void fill_image_row(Tensor<float>& batch, int row, const RasterImage& img) {
    batch.data.segment(batch.plane(row, 0), img.pixels.size()) = img.pixels;
}

Eigen::MatrixXd predict_all(Model<float>& model, const Dataset& data, int batch_size = 16) {
    const int n = static_cast<int>(data.samples.size());
    const int out_c = model.spec.out_channels;
    Eigen::MatrixXd pred(n, out_c);
    ForwardCache<float> cache;  // reused across batches to recycle buffers
    for (int at = 0; at < n; at += batch_size) {
        const int b = std::min(batch_size, n - at);
        Tensor<float> batch(b, 1, model.spec.input_h, model.spec.input_w);
        for (int i = 0; i < b; ++i) fill_image_row(batch, i, data.samples[at + i].image);
        const auto mat = prediction_matrix(forward(model, batch, Mode::Infer, &cache));
        for (int i = 0; i < b; ++i) {
            pred.row(at + i) = mat.row(i).cast<double>();
        }
    }
    return pred;
}

Eigen::VectorXd flatten_rows(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.size());
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        v.segment(at, m.cols()) = m.row(i).transpose();
        at += m.cols();
    }
    return v;
}

}  // namespace

TrainResult fit(const Dataset& train, const Dataset& val, const ModelSpec& spec,
                const TrainConfig& config, const AugmentConfig& augment) {
    config.validate();
    augment.validate();
    spec.validate();
    if (train.samples.empty()) throw Error("fit: empty train partition");
    if (val.samples.empty()) throw Error("fit: empty val partition");
    const int out_c = config.target == Target::MD ? 1 : kActivePoints;
    if (spec.out_channels != out_c) {
        throw Error("fit: model out_channels " + std::to_string(spec.out_channels) +
                    " does not match target " + target_name(config.target));
    }
    for (const auto& s : train.samples) {
        if (s.image.width != spec.input_w || s.image.height != spec.input_h) {
            throw Error("fit: sample image does not match model input dims");
        }
    }

    Model<float> model = make_model<float>(spec, config.seed);
    AdamState<float> adam = AdamState<float>::init(model);
    PlateauScheduler sched(config.lr0, config.plateau_patience, config.plateau_factor);
    double lr = config.lr0;

    const Eigen::MatrixXd val_targets = val.targets(config.target);
    const Eigen::VectorXd val_flat = flatten_rows(val_targets);

    TrainResult result;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best_loss = 0;
    result.best_val_r2 = -std::numeric_limits<double>::infinity();

    // Hoisted out of the step loop so activation buffers get recycled.
    ForwardCache<float> cache;
    Gradients<float> grads = make_zero_gradients(model);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        // Batch sampling stream, decorrelated from init and augmentation.
        Rng sampler(hash_combine(hash_combine(config.seed, 0x5a3b9e01u), epoch));
        double train_loss_sum = 0.0;
        for (int step = 0; step < config.steps_per_epoch; ++step) {
            Tensor<float> batch(config.batch_size, 1, spec.input_h, spec.input_w);
            Tensor<float> target(config.batch_size, out_c, 1, 1);
            for (int b = 0; b < config.batch_size; ++b) {
                const size_t idx = sampler.uniform_int(train.samples.size());
                const TrainSample& s = train.samples[idx];
                AugmentSample aug{s.image, s.vf};
                aug = augment_sample(aug, augment,
                                     stream_seed(config.seed, s.sample_id, epoch));
                fill_image_row(batch, b, aug.image);
                fill_target_row(target, b, aug.vf, config.target);
                ++result.samples_drawn;
            }
            Tensor<float> pred = forward(model, batch, Mode::Train, &cache);
            const float loss = mse_loss(pred, target);
            if (!std::isfinite(loss)) {
                throw Error("fit: non-finite loss at epoch " + std::to_string(epoch));
            }
            train_loss_sum += loss;
            for (auto& t : grads.tensors) t.data.setZero();
            backward(model, cache, mse_loss_grad(pred, target), grads);
            adam_step(model.parameters(), grads, adam, static_cast<float>(lr));
        }

        const Eigen::MatrixXd val_pred = predict_all(model, val);
        const Eigen::VectorXd val_pred_flat = flatten_rows(val_pred);
        const double val_loss = mse(val_flat, val_pred_flat);
        const double val_r2 = r2(val_flat, val_pred_flat);

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = train_loss_sum / config.steps_per_epoch;
        entry.val_loss = val_loss;
        entry.val_r2 = val_r2;
        entry.lr = lr;
        result.log.push_back(entry);
        log(LogLevel::Info, "epoch %d train_loss %.4f val_loss %.4f val_r2 %.4f lr %.3g",
            epoch, entry.train_loss, val_loss, val_r2, lr);

        if (val_r2 > result.best_val_r2) {
            result.best_val_r2 = val_r2;
            result.best_epoch = epoch;
            CheckpointMeta meta;
            meta.epoch = epoch;
            meta.seed = config.seed;
            meta.adam_step = adam.t;
            meta.lr = lr;
            meta.val_r2 = val_r2;
            meta.target = target_name(config.target);
            meta.modality = modality_name(config.modality);
            result.best_checkpoint = write_checkpoint(model, meta);
        }

        if (val_loss < best_loss) {
            best_loss = val_loss;
            since_best_loss = 0;
        } else if (++since_best_loss >= config.early_stop_patience) {
            break;
        }
        lr = sched.observe(val_loss);
    }
    if (result.best_checkpoint.empty()) throw Error("fit: no checkpoint produced");
    return result;
}

Eigen::MatrixXd predict_batch(Model<float>& model, const Dataset& data) {
    for (const auto& s : data.samples) {
        if (s.image.width != model.spec.input_w || s.image.height != model.spec.input_h) {
            throw Error("predict: sample image does not match model input dims");
        }
    }
    return predict_all(model, data);
}

Eigen::MatrixXd ensemble_average(const std::vector<Eigen::MatrixXd>& predictions) {
    if (predictions.empty()) throw Error("ensemble: empty prediction list");
    Eigen::MatrixXd sum = predictions[0];
    for (size_t i = 1; i < predictions.size(); ++i) {
        if (predictions[i].rows() != sum.rows() || predictions[i].cols() != sum.cols()) {
            throw Error("ensemble: prediction shape mismatch at member " + std::to_string(i));
        }
        sum += predictions[i];
    }
    return sum / static_cast<double>(predictions.size());
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,train_loss,val_loss,val_r2,lr\n";
    for (const auto& e : log) {
        out += std::to_string(e.epoch) + "," + format_f64(e.train_loss) + "," +
               format_f64(e.val_loss) + "," + format_f64(e.val_r2) + "," + format_f64(e.lr) +
               "\n";
    }
    return out;
}

std::string predictions_csv(const PredictionsFile& p) {
    const int cols = p.target == "md" ? 1 : kActivePoints;
    if (p.values.cols() != cols) {
        throw Error("predictions: " + std::to_string(p.values.cols()) +
                    " columns inconsistent with target " + p.target);
    }
    if (static_cast<Eigen::Index>(p.exam_ids.size()) != p.values.rows()) {
        throw Error("predictions: id/row count mismatch");
    }
    std::string out = "exam_id,target";
    for (int j = 0; j < cols; ++j) {
        char name[16];
        std::snprintf(name, sizeof name, ",c%02d", j + 1);
        out += name;
    }
    out += "\n";
    for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
        out += p.exam_ids[i] + "," + p.target;
        for (int j = 0; j < cols; ++j) {
            out += "," + format_f64(p.values(i, j));
        }
        out += "\n";
    }
    return out;
}

PredictionsFile parse_predictions_csv(const std::string& text) {
    const Csv csv = Csv::parse(text);
    if (csv.header.size() < 3 || csv.header[0] != "exam_id" || csv.header[1] != "target") {
        throw Error("predictions: header must start with exam_id,target");
    }
    PredictionsFile out;
    const int cols = static_cast<int>(csv.header.size()) - 2;
    out.values.resize(csv.rows.size(), cols);
    for (size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        out.exam_ids.push_back(row[0]);
        if (i == 0) {
            out.target = row[1];
        } else if (row[1] != out.target) {
            throw Error("predictions: mixed targets in one file");
        }
        for (int j = 0; j < cols; ++j) {
            out.values(i, j) = parse_double(row[2 + j], "predictions row " + std::to_string(i + 2));
        }
    }
    if (out.target != "md" && out.target != "thresholds") {
        throw Error("predictions: unknown target '" + out.target + "'");
    }
    const int expected = out.target == "md" ? 1 : kActivePoints;
    if (cols != expected) {
        throw Error("predictions: " + std::to_string(cols) + " channels for target " +
                    out.target);
    }
    return out;
}

}  // namespace octvf
