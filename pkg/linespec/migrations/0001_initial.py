# Generated by Django 5.2.5
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='BenchmarkRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('seed', models.PositiveBigIntegerField()),
                ('trials', models.PositiveIntegerField()),
                ('sweep_var', models.CharField(choices=[('snr_db', 'SNR (dB)'), ('m', 'Number of samples')], max_length=10)),
                ('config', models.JSONField(default=dict)),
                ('timings', models.JSONField(default=dict)),
                ('failures', models.PositiveIntegerField(default=0)),
                ('notes', models.TextField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='RmseRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('sweep_value', models.FloatField()),
                ('estimator', models.CharField(choices=[('map', 'MAP (alternating projections)'), ('esprit', 'ESPRIT')], max_length=10)),
                ('freq_index', models.PositiveSmallIntegerField()),
                ('rmse', models.FloatField(null=True)),
                ('crb_sqrt', models.FloatField(null=True)),
                ('crb_mean_sqrt', models.FloatField(null=True)),
                ('acrb_sqrt', models.FloatField(null=True)),
                ('trials', models.PositiveIntegerField()),
                ('failures', models.PositiveIntegerField(default=0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='linespec.benchmarkrun')),
            ],
            options={
                'ordering': ['sweep_value', 'estimator', 'freq_index'],
                'constraints': [models.UniqueConstraint(fields=('run', 'sweep_value', 'estimator', 'freq_index'), name='uniq_rmse_row_per_point')],
            },
        ),
    ]
