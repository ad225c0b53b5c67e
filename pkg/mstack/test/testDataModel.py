# -*- coding: utf-8 -*-

'''
Test studies, training-set lists, target weights and feasible sets

Created on  2024-03-20

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import tempfile
import numpy as np
from django.test import SimpleTestCase
from mstack.data import (
    StudyCollection, TrainingSetList, TargetWeights, FeasibleSet, generalist_nu, specialist_nu, study_specific_lts, validate_lts
)
from mstack.exceptions import (
    DataFileError, DuplicatePair, EmptySet, IndexOutOfRange, InvalidArgument, ShapeMismatch
)
from mstack.test import data


class TestStudyCollection(SimpleTestCase):
    '''
    Ingestion and indexing of study collections
    '''
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def testReadCsv(self):
        '''
        Studies come out in order of first appearance with their rows in file order
        '''
        collection = StudyCollection.read_csv(data.write_csv(self.tmp.name))
        self.assertTrue(collection.ids == ['a', 'b', 'c'], f'Incorrect study ids {collection.ids}')
        self.assertTrue(list(collection.sizes) == [5, 5, 5], f'Incorrect sizes {collection.sizes}')
        self.assertTrue(collection.p == 2, f'Incorrect feature width {collection.p}')
        self.assertTrue(collection[1].y[0] == 0.3, f'Incorrect first y of study b {collection[1].y[0]}')

    def testMissingColumn(self):
        '''
        A file without a y column is a data error
        '''
        path = f'{self.tmp.name}/bad.csv'
        with open(path, 'w') as f:
            f.write('study,x1\na,1.0\n')
        with self.assertRaises(DataFileError):
            StudyCollection.read_csv(path)

    def testNonNumeric(self):
        '''
        Non-numeric feature values are rejected
        '''
        rows = list(data.CSV_ROWS)
        rows[2] = ('a', 2.1, 'high', 0.2)
        with self.assertRaises(DataFileError):
            StudyCollection.read_csv(data.write_csv(self.tmp.name, rows))

    def testMismatchedWidths(self):
        '''
        Studies must share the feature width
        '''
        with self.assertRaises(ShapeMismatch):
            StudyCollection.from_arrays([np.zeros(3), np.zeros(3)], [np.zeros((3, 2)), np.zeros((3, 1))])

    def testWithoutSample(self):
        '''
        Removing a sample shortens only its study
        '''
        collection = data.ex1_collection()
        reduced = collection.without_sample(1, 2)
        self.assertTrue(list(reduced.sizes) == [3, 4], f'Incorrect sizes {reduced.sizes}')
        self.assertTrue(list(reduced[1].y) == [-2.0, -1.0, -1.5, -0.5], f'Incorrect remaining y {reduced[1].y}')

    def testCsvRoundTrip(self):
        '''
        to_csv writes what read_csv reads
        '''
        collection = data.linear_collection(K=2, n=6)
        path = f'{self.tmp.name}/out.csv'
        collection.to_csv(path)
        back = StudyCollection.read_csv(path)
        self.assertTrue(np.array_equal(back.stacked_X(), collection.stacked_X()), 'Features changed on round trip')
        self.assertTrue(np.array_equal(back.stacked_y(), collection.stacked_y()), 'Responses changed on round trip')


class TestTrainingSetList(SimpleTestCase):
    '''
    Validation and construction of training-set lists
    '''
    def setUp(self):
        self.collection = data.ex1_collection()

    def testStudySpecific(self):
        '''
        The study-specific list has one set per study
        '''
        lts = study_specific_lts(self.collection)
        validate_lts(lts, self.collection)
        self.assertTrue(lts.T == 2, f'Incorrect set count {lts.T}')
        self.assertTrue(lts.is_study_specific(self.collection), 'Study-specific list not recognized')
        self.assertTrue(lts.supports == [frozenset([0]), frozenset([1])], f'Incorrect supports {lts.supports}')

    def testStudySpecificPairs(self):
        collection = StudyCollection.from_arrays([np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0])])
        lts = study_specific_lts(collection)
        self.assertTrue(np.array_equal(lts.sets[0], [[0, 0], [1, 0], [2, 0]]), f'Incorrect first set {lts.sets[0]}')
        self.assertTrue(np.array_equal(lts.sets[1], [[0, 1], [1, 1]]), f'Incorrect second set {lts.sets[1]}')

    def testOutOfRange(self):
        '''
        A sample index beyond the study size is reported with 1-based numbers
        '''
        lts = TrainingSetList(([[0, 0], [3, 0]],))
        with self.assertRaises(IndexOutOfRange) as context:
            lts.validate(self.collection)
        self.assertTrue('sample 4 of study 1' in str(context.exception), f'Incorrect message {context.exception}')

    def testDuplicate(self):
        lts = TrainingSetList(([[0, 1], [0, 1]],))
        with self.assertRaises(DuplicatePair):
            lts.validate(self.collection)

    def testEmpty(self):
        lts = TrainingSetList((np.zeros((0, 2)),))
        with self.assertRaises(EmptySet):
            lts.validate(self.collection)

    def testDescriptors(self):
        '''
        pooled and study-specific+pooled descriptors
        '''
        pooled = TrainingSetList.from_descriptor('pooled', self.collection)
        self.assertTrue(pooled.T == 1 and len(pooled.sets[0]) == 8, f'Incorrect pooled set {pooled.sets}')
        both = TrainingSetList.from_descriptor('study-specific+pooled', self.collection)
        self.assertTrue(both.T == 3, f'Incorrect set count {both.T}')
        custom = TrainingSetList.from_descriptor([{'pairs': [[1, 1], [2, 2]]}], self.collection)
        self.assertTrue(custom.sets[0].tolist() == [[0, 0], [1, 1]], f'Incorrect 0-based pairs {custom.sets[0]}')
        bare = TrainingSetList.from_descriptor([[[1, 1], [2, 1]], [[1, 2]]], self.collection)
        self.assertTrue(bare.supports == [frozenset([0]), frozenset([1])], f'Incorrect bare pair sets {bare.sets}')
        with self.assertRaises(InvalidArgument):
            TrainingSetList.from_descriptor('everything', self.collection)

    def testEmptyList(self):
        '''
        A list without training sets is a configuration error
        '''
        lts = TrainingSetList.from_descriptor([], self.collection)
        with self.assertRaises(InvalidArgument) as context:
            validate_lts(lts, self.collection)
        self.assertTrue('--lts' in str(context.exception), f'Message does not name the flag: {context.exception}')

    def testWithoutSample(self):
        '''
        Dropping a sample renumbers later samples of the same study
        '''
        lts = TrainingSetList.from_descriptor('pooled', self.collection).without_sample(1, 1)
        study2 = lts.sets[0][lts.sets[0][:, 1] == 1, 0]
        self.assertTrue(sorted(study2.tolist()) == [0, 1, 2, 3], f'Incorrect renumbering {study2}')


class TestTargetWeightsAndFeasibleSets(SimpleTestCase):
    '''
    Target weights and feasible sets
    '''
    def testTargetWeights(self):
        self.assertTrue(np.allclose(generalist_nu(4).nu, 0.25), 'Generalist weights are not uniform')
        self.assertTrue(list(specialist_nu(3, 2).nu) == [0.0, 0.0, 1.0], 'Incorrect specialist weights')
        with self.assertRaises(InvalidArgument):
            TargetWeights([0.5, 0.6])
        with self.assertRaises(InvalidArgument):
            specialist_nu(3, 3)

    def testFeasibleSetParse(self):
        box = FeasibleSet.parse('box:-1,2')
        self.assertTrue(box.kind == 'box' and box.lower == -1.0 and box.upper == 2.0, f'Incorrect box {box}')
        self.assertTrue(FeasibleSet.parse('free').kind == 'free', 'free not parsed')
        with self.assertRaises(InvalidArgument):
            FeasibleSet.parse('box:2,1')
        with self.assertRaises(InvalidArgument):
            FeasibleSet.parse('ball')
